"""Univariate kernel density marginals.

Each variable gets a Gaussian-kernel density estimate fit to its observed
values.  The estimate provides three callables used everywhere else in the
package:

* ``pdf`` for the marginal density term of the joint log density,
* ``cdf`` for mapping data to the unit interval (probability integral
  transform) before any copula computation,
* ``quantile`` for mapping unit-interval draws back to the data scale when
  sampling.

The cdf is clamped away from 0 and 1 so its normal score is always finite;
the clamp bounds double as the reachable range of ``quantile``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateInputError, EmptyInputError, InvalidInputError, OutOfRangeError

__all__ = ["KdeMarginal", "fit_kde", "CDF_FLOOR", "CDF_CEIL"]

# Smallest / largest value the clamped cdf can return.  Keeps normal scores
# inside +/- ndtri(1 - 1e-6) ~= 4.7534 so downstream copula terms stay finite.
CDF_FLOOR = 1e-6
CDF_CEIL = 1.0 - 1e-6

# Kernel mass beyond 5 bandwidths is ~2.9e-7 per side, so [min - 5h, max + 5h]
# carries all but ~6e-7 of the total probability.
_SUPPORT_PAD = 5.0

# Element budget per kernel-matrix chunk (points x centers), ~256 MB of f8.
_CHUNK_ELEMENTS = 32_000_000

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class KdeMarginal:
    """Gaussian kernel density estimate of one variable.

    Attributes
    ----------
    samples : ndarray
        The observed values the estimate was fit to (1-d, finite).
    bandwidth : float
        Common kernel standard deviation.
    support_lo, support_hi : float
        Range outside which the density is treated as negligible.
    """

    samples: np.ndarray
    bandwidth: float
    support_lo: float
    support_hi: float

    @classmethod
    def from_params(cls, samples, bandwidth):
        """Build from samples and a bandwidth, deriving the support bounds.

        Shared by fitting and deserialization so both produce identical
        estimates from identical parameters.
        """
        samples = np.array(samples, dtype=float).reshape(-1)
        if samples.size == 0:
            raise EmptyInputError("no samples")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("samples contain non-finite values")
        bandwidth = float(bandwidth)
        if not np.isfinite(bandwidth) or bandwidth <= 0.0:
            raise OutOfRangeError(f"bandwidth must be a positive real, got {bandwidth!r}")
        samples.setflags(write=False)
        lo = float(samples.min() - _SUPPORT_PAD * bandwidth)
        hi = float(samples.max() + _SUPPORT_PAD * bandwidth)
        return cls(samples=samples, bandwidth=bandwidth, support_lo=lo, support_hi=hi)

    def _kernel_columns(self, x):
        """Yield (x_chunk_slice, standardized differences) in bounded chunks."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        step = max(1, _CHUNK_ELEMENTS // max(1, self.samples.size))
        for start in range(0, flat.size, step):
            chunk = flat[start : start + step]
            yield slice(start, start + chunk.size), (chunk[:, None] - self.samples[None, :]) / self.bandwidth

    def pdf(self, x):
        """Density at ``x`` (scalar or array; returns matching shape)."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.size, dtype=float)
        for sl, t in self._kernel_columns(x):
            out[sl] = np.exp(-0.5 * t * t).mean(axis=1)
        out *= _INV_SQRT_2PI / self.bandwidth
        return out.reshape(x.shape) if x.shape else float(out[0])

    def cdf(self, x):
        """Clamped distribution function at ``x``.

        Values are clipped to ``[CDF_FLOOR, CDF_CEIL]`` so the normal score
        of any output is finite.
        """
        x = np.asarray(x, dtype=float)
        out = np.empty(x.size, dtype=float)
        for sl, t in self._kernel_columns(x):
            out[sl] = ndtr(t).mean(axis=1)
        np.clip(out, CDF_FLOOR, CDF_CEIL, out=out)
        return out.reshape(x.shape) if x.shape else float(out[0])

    @cached_property
    def _bracket_grid(self):
        # Monotone cdf table used to start quantile bisection on a narrow
        # bracket instead of the whole support.
        xs = np.linspace(self.support_lo, self.support_hi, 1025)
        return xs, self.cdf(xs)

    def quantile(self, u, tol=1e-10, max_iter=200):
        """Inverse of :meth:`cdf` by bisection.

        Parameters
        ----------
        u : scalar or array
            Target probabilities, each strictly inside (0, 1).  Targets are
            clipped to the reachable range ``[CDF_FLOOR, CDF_CEIL]`` first.
        tol : float
            Stop once ``max |cdf(x) - u| < tol``.

        Returns
        -------
        Value(s) ``x`` with ``|cdf(x) - u| < tol``, shaped like ``u``.
        """
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1)
        if flat.size == 0:
            return u.copy()
        if not np.all(np.isfinite(flat)) or np.any(flat <= 0.0) or np.any(flat >= 1.0):
            raise OutOfRangeError("quantile targets must lie strictly inside (0, 1)")
        target = np.clip(flat, CDF_FLOOR, CDF_CEIL)

        xs, cs = self._bracket_grid
        hi_idx = np.clip(np.searchsorted(cs, target, side="left"), 1, xs.size - 1)
        lo = xs[hi_idx - 1].copy()
        hi = xs[hi_idx].copy()
        # Grid clamping can leave the target outside [cdf(lo), cdf(hi)] at the
        # extreme ends; widen to the full support there.
        lo[target <= cs[0]] = self.support_lo
        hi[target >= cs[-1]] = self.support_hi

        mid = 0.5 * (lo + hi)
        for _ in range(max_iter):
            fmid = self.cdf(mid)
            err = fmid - target
            if np.max(np.abs(err)) < tol:
                break
            high = err > 0.0
            hi[high] = mid[high]
            lo[~high] = mid[~high]
            mid = 0.5 * (lo + hi)
        return mid.reshape(u.shape) if u.shape else float(mid[0])


def fit_kde(values, bandwidth_override=None):
    """Fit a Gaussian kernel density to one variable's observed values.

    Parameters
    ----------
    values : array_like
        Observed values; NaN entries are treated as missing and dropped.
    bandwidth_override : float, optional
        Use this kernel width instead of the data-driven rule
        ``1.06 * std(values, ddof=1) * len(values) ** (-1/5)``.

    Returns
    -------
    KdeMarginal

    Raises
    ------
    EmptyInputError
        No values (after dropping NaN).
    DegenerateInputError
        Fewer than two values, or all values identical.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim > 1:
        raise InvalidInputError(f"marginal values must be one-dimensional, got shape {arr.shape}")
    arr = arr.reshape(-1)
    arr = arr[~np.isnan(arr)]
    if arr.size == 0:
        raise EmptyInputError("no observed values to fit a marginal to")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("marginal values contain +/-inf")
    if arr.size < 2:
        raise DegenerateInputError("need at least 2 observed values to fit a marginal")
    std = float(np.std(arr, ddof=1))
    if std == 0.0:
        raise DegenerateInputError("all observed values are identical; marginal would be degenerate")
    if bandwidth_override is None:
        bandwidth = 1.06 * std * arr.size ** (-0.2)
    else:
        bandwidth = float(bandwidth_override)
        if not np.isfinite(bandwidth) or bandwidth <= 0.0:
            raise OutOfRangeError(f"bandwidth override must be a positive real, got {bandwidth_override!r}")
    return KdeMarginal.from_params(arr, bandwidth)
