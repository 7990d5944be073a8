"""Test-only problem definitions implementing the engine protocol."""

import numpy as np


class QuadraticProblem:
    """Finite-sum ridge least squares: f_i(w) = (x_i.w - z_i)^2 / 2 + lam/2 ||w||^2.

    Dense, strongly convex, with a closed-form Hessian; used as the
    linear-convergence oracle for the baseline engines.
    """

    def __init__(self, X, z, lam):
        self.X = np.asarray(X, dtype=np.float64)
        self.z = np.asarray(z, dtype=np.float64)
        self.lam = float(lam)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def objective(self, w):
        r = self.X @ w - self.z
        return float(0.5 * np.mean(r**2) + 0.5 * self.lam * (w @ w))

    def full_gradient(self, w):
        r = self.X @ w - self.z
        return self.X.T @ r / self.n + self.lam * w

    def subset_gradient(self, w, subset, weights=None):
        idx = np.asarray(subset, dtype=np.int64)
        A = self.X[idx]
        r = A @ w - self.z[idx]
        if weights is not None:
            r = r * weights[idx]
            reg = self.lam * float(weights[idx].mean())
        else:
            reg = self.lam
        return A.T @ r / idx.shape[0] + reg * w

    def subset_gradient_diff(self, w_a, w_b, subset, winv=None):
        idx = np.asarray(subset, dtype=np.int64)
        A = self.X[idx]
        dr = A @ (w_a - w_b)
        reg = self.lam
        if winv is not None:
            dr = dr * winv[idx]
            reg = self.lam * float(winv[idx].mean())
        return A.T @ dr / idx.shape[0] + reg * (w_a - w_b)

    def smoothness_constant(self):
        return float(max((self.X**2).sum(axis=1).max(), 0.0) + self.lam)

    def strong_convexity_constant(self):
        return self.lam

    def hessian(self):
        return self.X.T @ self.X / self.n + self.lam * np.eye(self.d)


def random_quadratic(n, d, seed, lam=0.01):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)) / np.sqrt(d)
    w_star = rng.normal(size=d)
    z = X @ w_star + 0.1 * rng.normal(size=n)
    return QuadraticProblem(X, z, lam)
