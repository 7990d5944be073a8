"""L2-regularized logistic regression objective and its gradients.

The regularizer is folded into every component, so each component loss
f_i(w) = log(1 + exp(-z_i x_i.w)) + (lam/2)||w||^2 is lam-strongly
convex and P(w) = mean_i f_i(w) counts the regularizer once. All
operations are pure functions of (problem, w, indices) and safe to call
concurrently.
"""

import numpy as np
from scipy.special import expit

from . import _kernels


class LogisticL2Problem:
    def __init__(self, dataset, lam):
        if not lam > 0:
            raise ValueError(f"lam must be > 0, got {lam}")
        self.dataset = dataset
        self.lam = float(lam)
        self._data = dataset.X.data
        self._indices = dataset.X.indices
        self._indptr = dataset.X.indptr
        self._L = None

    @property
    def n(self):
        return self.dataset.n

    @property
    def d(self):
        return self.dataset.d

    def objective(self, w):
        """P(w) = mean_i log(1+exp(-z_i x_i.w)) + (lam/2)||w||^2.

        log(1+exp(u)) is evaluated as logaddexp(0, u), which is stable
        for |x_i.w| far beyond exp overflow.
        """
        t = self.dataset.X @ w
        losses = np.logaddexp(0.0, -self.dataset.z * t)
        return float(losses.mean() + 0.5 * self.lam * (w @ w))

    def component_loss(self, w, i):
        """f_i(w), the single-component objective."""
        ex = self.dataset.row(i)
        t = ex.values @ w[ex.indices]
        return float(np.logaddexp(0.0, -ex.label * t) + 0.5 * self.lam * (w @ w))

    def component_gradient(self, w, i):
        """grad f_i(w) = -z_i sigmoid(-z_i x_i.w) x_i + lam w."""
        ex = self.dataset.row(i)
        t = ex.values @ w[ex.indices]
        coef = -ex.label * expit(-ex.label * t)
        g = self.lam * w.copy()
        g[ex.indices] += coef * ex.values
        return g

    def full_gradient(self, w):
        """grad P(w) in a single pass over the data."""
        z = self.dataset.z
        t = self.dataset.X @ w
        coef = -z * expit(-z * t) / self.n
        return self.dataset.X.T @ coef + self.lam * w

    def subset_gradient(self, w, subset):
        """Mean of component gradients over `subset` (a multiset of indices)."""
        idx = _as_index_array(subset)
        z = self.dataset.z[idx]
        t = _kernels.rows_dot(self._data, self._indices, self._indptr, idx, w)
        coef = -z * expit(-z * t)
        out = np.zeros(self.d)
        _kernels.rows_scatter(self._data, self._indices, self._indptr, idx, coef, out)
        out /= idx.shape[0]
        out += self.lam * w
        return out

    def weighted_subset_gradient(self, w, subset, dist):
        """Importance-weighted estimate: mean over subset of grad f_i(w)/(n q_i).

        `subset` must be drawn i.i.d. from `dist`; a zero-probability
        index in the subset makes the estimator undefined.
        """
        idx = _as_index_array(subset)
        winv = dist.inv_scaled[idx]
        if not np.all(np.isfinite(winv)):
            from .sampling import DegenerateDistributionError

            raise DegenerateDistributionError(
                "subset contains an index with zero sampling probability"
            )
        z = self.dataset.z[idx]
        t = _kernels.rows_dot(self._data, self._indices, self._indptr, idx, w)
        coef = -z * expit(-z * t) * winv
        out = np.zeros(self.d)
        _kernels.rows_scatter(self._data, self._indices, self._indptr, idx, coef, out)
        out /= idx.shape[0]
        out += (self.lam * float(winv.mean())) * w
        return out

    def subset_gradient_diff(self, w_a, w_b, subset, winv=None):
        """grad P_S(w_a) - grad P_S(w_b), optionally importance-weighted.

        Single pass over the batch rows; `winv` is the full-length
        1/(n q_i) table or None for the plain estimator.
        """
        idx = _as_index_array(subset)
        z = self.dataset.z[idx]
        t_a, t_b = _kernels.rows_dot_two(
            self._data, self._indices, self._indptr, idx, w_a, w_b
        )
        coef = -z * (expit(-z * t_a) - expit(-z * t_b))
        regscale = 1.0
        if winv is not None:
            sel = winv[idx]
            coef = coef * sel
            regscale = float(sel.mean())
        out = np.zeros(self.d)
        _kernels.rows_scatter(self._data, self._indices, self._indptr, idx, coef, out)
        out /= idx.shape[0]
        out += (self.lam * regscale) * (w_a - w_b)
        return out

    def smoothness_constant(self):
        """L = max_i ||x_i||^2 / 4 + lam, the per-component logistic bound."""
        if self._L is None:
            sq = np.zeros(self.n)
            np.add.at(
                sq,
                np.repeat(np.arange(self.n), np.diff(self._indptr)),
                self._data**2,
            )
            self._L = float(sq.max() / 4.0 + self.lam)
        return self._L

    def strong_convexity_constant(self):
        """mu = lam (each component carries the full regularizer)."""
        return self.lam


def _as_index_array(subset):
    idx = np.asarray(subset, dtype=np.int64)
    if idx.ndim != 1 or idx.shape[0] == 0:
        raise ValueError("subset must be a non-empty 1-d index collection")
    return idx
