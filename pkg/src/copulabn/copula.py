"""Uniform-correlation Gaussian copula.

The local dependence model used by every family in the network: an
``n``-dimensional Gaussian copula whose correlation matrix has unit diagonal
and a single shared off-diagonal parameter ``rho``,

    Sigma = (1 - rho) * I + rho * J.

That structure gives closed forms for everything the package needs:

* ``log|Sigma| = (n-1) * log(1-rho) + log(1 + (n-1) * rho)``
* ``Sigma^-1 = (1/(1-rho)) * [I - (rho / (1 + (n-1) rho)) * J]``
* the copula log density reduces to an affine function of the normal-score
  statistics ``q = sum(z_i^2)`` and ``s = sum(z_i)``, which is what makes
  both the missing-data expectations and the maximum-likelihood objective
  cheap (see :class:`FamilyStats`).

``rho`` is valid iff Sigma is positive definite, i.e. ``rho`` in
``(-1/(n-1), 1)``; we shrink that interval by a small margin at both ends so
Sigma stays numerically positive definite during optimization.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidInputError, InvalidRhoError, OutOfRangeError, TooFewRowsError

__all__ = [
    "RHO_MARGIN",
    "UniformGaussianCopula",
    "rho_bounds",
    "uniform_sigma_logdet",
    "copula_log_density",
    "copula_log_density_rows",
    "ratio_log",
    "ratio_log_from_z",
    "conditional_z_params",
    "fit_rho",
    "golden_section_maximize",
    "maximize_over_rho",
    "FamilyStats",
    "stats_from_z_rows",
]

# How far the usable rho interval stays away from the positive-definiteness
# boundary (-1/(n-1), 1).
RHO_MARGIN = 1e-4

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def rho_bounds(n):
    """Open interval of usable correlations for dimension ``n >= 2``."""
    if n < 2:
        raise InvalidInputError(f"rho bounds need dimension >= 2, got {n}")
    return -1.0 / (n - 1) + RHO_MARGIN, 1.0 - RHO_MARGIN


def _check_rho(n, rho):
    if n == 1:
        if rho != 0.0:
            raise InvalidRhoError("a 1-dimensional copula must have rho = 0")
        return
    lo, hi = rho_bounds(n)
    if not np.isfinite(rho) or not (lo <= rho <= hi):
        raise InvalidRhoError(f"rho={rho!r} outside [{lo:.6g}, {hi:.6g}] for dimension {n}")


@dataclass(frozen=True)
class UniformGaussianCopula:
    """Gaussian copula with a single shared correlation.

    Attributes
    ----------
    n : int
        Dimension (>= 1).  ``n == 1`` forces ``rho == 0`` and a log density
        that is identically zero.
    rho : float
        Shared off-diagonal correlation.
    """

    n: int
    rho: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidInputError(f"copula dimension must be a positive integer, got {self.n!r}")
        _check_rho(self.n, self.rho)


def uniform_sigma_logdet(n, rho):
    """log-determinant of ``(1-rho) I + rho J`` for dimension ``n``.

    Closed form: ``(n-1) log(1-rho) + log(1 + (n-1) rho)``.
    """
    if n < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {n}")
    if n == 1:
        # A 1x1 correlation matrix is just [1]; rho plays no role.
        return 0.0
    _check_rho(n, rho)
    return (n - 1) * np.log1p(-rho) + np.log1p((n - 1) * rho)


def _exponent_from_stats(n, rho, q, s_sq):
    """``z' (Sigma^-1 - I) z`` written in the statistics q, s^2.

    Equals ``(q - rho * s_sq / (1 + (n-1) rho)) / (1 - rho) - q``; exact
    zero at rho = 0 and for n = 1.
    """
    if n == 1:
        return np.zeros_like(np.asarray(q, dtype=float))
    return (q - rho * s_sq / (1.0 + (n - 1) * rho)) / (1.0 - rho) - q


def _log_density_from_stats(n, rho, q, s_sq):
    if n == 1:
        return np.zeros_like(np.asarray(q, dtype=float))
    return -0.5 * uniform_sigma_logdet(n, rho) - 0.5 * _exponent_from_stats(n, rho, q, s_sq)


def _scores(u):
    u = np.asarray(u, dtype=float)
    if u.size and (not np.all(np.isfinite(u)) or np.any(u <= 0.0) or np.any(u >= 1.0)):
        raise OutOfRangeError("u values must lie strictly inside (0, 1)")
    return ndtri(u)


def copula_log_density(c, u):
    """Log copula density at one point of the open unit cube.

    Parameters
    ----------
    c : UniformGaussianCopula
    u : sequence of ``c.n`` reals, each strictly inside (0, 1).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != c.n:
        raise InvalidInputError(f"expected {c.n} coordinates, got {u.size}")
    z = _scores(u)
    q = float(z @ z)
    s = float(z.sum())
    return float(_log_density_from_stats(c.n, c.rho, q, s * s))


def copula_log_density_rows(c, u_rows):
    """Vectorized :func:`copula_log_density` over rows of points."""
    u = np.asarray(u_rows, dtype=float)
    if u.ndim != 2 or u.shape[1] != c.n:
        raise InvalidInputError(f"expected an (m, {c.n}) array of points, got shape {u.shape}")
    z = _scores(u)
    q = np.einsum("ij,ij->i", z, z)
    s = z.sum(axis=1)
    return _log_density_from_stats(c.n, c.rho, q, s * s)


def ratio_log_from_z(n, rho, z_rows):
    """Log ratio terms from normal scores, child column first.

    ``z_rows`` has shape ``(m, n)`` with the child's score in column 0 and
    parents after it.  Returns the per-row log of (family copula density /
    parent-block copula density), both with the same ``rho``.  Zero when
    there are no parents.
    """
    z = np.asarray(z_rows, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[1] != n:
        raise InvalidInputError(f"expected {n} columns, got {z.shape[1]}")
    if n == 1:
        return np.zeros(z.shape[0])
    q = np.einsum("ij,ij->i", z, z)
    s = z.sum(axis=1)
    top = _log_density_from_stats(n, rho, q, s * s)
    zp = z[:, 1:]
    qp = np.einsum("ij,ij->i", zp, zp)
    sp = zp.sum(axis=1)
    bottom = _log_density_from_stats(n - 1, rho, qp, sp * sp)
    return top - bottom


def ratio_log(c_family, u_child, u_parents):
    """Log of the family's density ratio term at one point.

    The term is the family copula density over (child, parents) divided by
    the copula density of the parent block alone, both sharing the family's
    ``rho``; it plays the role of a conditional density factor.  Families
    with no parents contribute exactly 0.

    Parameters
    ----------
    c_family : UniformGaussianCopula
        Copula of dimension ``1 + len(u_parents)``.
    u_child : real in (0, 1)
    u_parents : sequence of reals in (0, 1)
    """
    parents = np.asarray(u_parents, dtype=float).reshape(-1)
    if c_family.n != 1 + parents.size:
        raise InvalidInputError(
            f"family copula has dimension {c_family.n} but got {parents.size} parents"
        )
    row = np.concatenate(([float(u_child)], parents))
    z = _scores(row)
    return float(ratio_log_from_z(c_family.n, c_family.rho, z[None, :])[0])


def conditional_z_params(c, z_parents):
    """Mean and variance of the child's normal score given parents' scores.

    Standard Gaussian conditioning under the uniform-correlation matrix:
    ``mean = rho * sum(z_parents) / (1 + (k-1) rho)`` and
    ``variance = 1 - k * rho**2 / (1 + (k-1) rho)`` for ``k`` parents.
    """
    z = np.asarray(z_parents, dtype=float).reshape(-1)
    k = z.size
    if c.n != k + 1:
        raise InvalidInputError(f"copula dimension {c.n} does not match {k} parents")
    if k == 0:
        return 0.0, 1.0
    _check_rho(c.n, c.rho)
    rho = c.rho
    denom = 1.0 + (k - 1) * rho
    mean = rho * float(z.sum()) / denom
    variance = 1.0 - k * rho * rho / denom
    return mean, float(variance)


def golden_section_maximize(fn, lo, hi, tol=1e-6):
    """Golden-section search for a maximum of ``fn`` on ``[lo, hi]``.

    Returns ``(x, fn(x))`` once the bracketing interval is narrower than
    ``tol``.  Unimodality is the caller's responsibility; combine with a
    coarse grid when that is not guaranteed (see :func:`maximize_over_rho`).
    """
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def maximize_over_rho(objective, n, tol=1e-6, coarse_points=33):
    """Maximize a scalar objective over the valid rho interval.

    A coarse grid brackets the best region, golden-section search refines
    it, and the returned value is guaranteed to score at least as high as
    the interval endpoints and rho = 0.
    """
    lo, hi = rho_bounds(n)
    grid = np.linspace(lo, hi, coarse_points)
    vals = np.array([objective(r) for r in grid])
    best = int(np.argmax(vals))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, coarse_points - 1)]
    x, fx = golden_section_maximize(objective, a, b, tol)
    candidates = [(fx, float(x)), (float(vals[0]), float(grid[0])), (float(vals[-1]), float(grid[-1]))]
    if lo < 0.0 < hi:
        candidates.append((float(objective(0.0)), 0.0))
    fbest, xbest = max(candidates, key=lambda t: t[0])
    return xbest, fbest


@dataclass(frozen=True)
class FamilyStats:
    """Sufficient statistics of one family's rho objective.

    The family log-density ratio summed over rows is affine in
    ``A = sum_rows q`` and ``B = sum_rows s^2`` (and the parent-block
    analogues), so any weighted sum of ratio terms — including the
    missing-data expectations, which are themselves affine in per-row q and
    s^2 — collapses to these five numbers.  ``objective(rho)`` then costs
    O(1), which is what makes per-family maximum likelihood cheap inside
    structure search.

    Attributes
    ----------
    num_rows : float
        Total weight (plain row count when nothing is hidden).
    dim : int
        Family dimension (child + parents).
    fam_q, fam_s_sq : float
        Sums over rows of (expected) q and s^2 for the full family block.
    par_q, par_s_sq : float
        Same for the parent block.
    """

    num_rows: float
    dim: int
    fam_q: float
    fam_s_sq: float
    par_q: float
    par_s_sq: float

    def objective(self, rho):
        """Sum over rows of (expected) family log ratio terms at ``rho``."""
        n = self.dim
        top = -0.5 * (
            self.num_rows * uniform_sigma_logdet(n, rho)
            + _exponent_from_stats(n, rho, self.fam_q, self.fam_s_sq)
        )
        if n - 1 >= 2:
            bottom = -0.5 * (
                self.num_rows * uniform_sigma_logdet(n - 1, rho)
                + _exponent_from_stats(n - 1, rho, self.par_q, self.par_s_sq)
            )
        else:
            bottom = 0.0
        return top - bottom

    def fit(self, tol=1e-6):
        """Maximizing rho and the objective value there."""
        return maximize_over_rho(self.objective, self.dim, tol=tol)


def stats_from_z_rows(z_rows):
    """Exact :class:`FamilyStats` from fully observed normal-score rows."""
    z = np.asarray(z_rows, dtype=float)
    if z.ndim != 2 or z.shape[1] < 2:
        raise InvalidInputError("need an (m, d>=2) array of scores")
    q = np.einsum("ij,ij->i", z, z)
    s = z.sum(axis=1)
    zp = z[:, 1:]
    qp = np.einsum("ij,ij->i", zp, zp)
    sp = zp.sum(axis=1)
    return FamilyStats(
        num_rows=float(z.shape[0]),
        dim=int(z.shape[1]),
        fam_q=float(q.sum()),
        fam_s_sq=float((s * s).sum()),
        par_q=float(qp.sum()),
        par_s_sq=float((sp * sp).sum()),
    )


def fit_rho(family_u_rows, tol=1e-6):
    """Maximum-likelihood rho for one family from unit-cube rows.

    Parameters
    ----------
    family_u_rows : array_like of shape (m, k+1)
        One row per instance: child's u value first, then the parents'.
        All values strictly inside (0, 1).
    tol : float
        Absolute tolerance of the golden-section search.

    Returns
    -------
    float
        The rho maximizing the summed log ratio terms; its objective value
        is >= the objective at both interval endpoints and at rho = 0.

    Raises
    ------
    TooFewRowsError
        Fewer than two rows.
    """
    u = np.asarray(family_u_rows, dtype=float)
    if u.ndim != 2:
        raise InvalidInputError("family rows must form a 2-d array")
    if u.shape[0] < 2:
        raise TooFewRowsError(f"need at least 2 rows to fit rho, got {u.shape[0]}")
    if u.shape[1] < 2:
        raise InvalidInputError("a family needs at least one parent to have a rho")
    z = _scores(u)
    rho, _ = stats_from_z_rows(z).fit(tol=tol)
    return rho
