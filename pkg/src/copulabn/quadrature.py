"""Small quadrature rules used for expectations and normalization checks.

Two rules cover everything the package needs:

* Gauss-Legendre on the unit interval, for integrating densities written in
  the copula's native ``u`` coordinates (normalization checks, marginal
  curve integrals).
* Gauss-Hermite for expectations under independent standard normals.  The
  hidden coordinates of a partially observed instance are uniform on (0, 1)
  after the probability integral transform, so their normal scores are
  standard normal; expectations of the copula log terms are therefore
  Gaussian integrals, which this rule evaluates exactly because those terms
  are quadratic polynomials in the scores.

Rules are cached by node count; nodes and weights are plain float64 arrays.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_hermitenorm, roots_legendre

from .errors import OutOfRangeError

__all__ = [
    "unit_legendre_rule",
    "normal_hermite_rule",
    "tensor_rule",
    "rule_moments",
]


def _check_nodes(num_nodes):
    if not isinstance(num_nodes, (int, np.integer)) or num_nodes < 1:
        raise OutOfRangeError(f"node count must be a positive integer, got {num_nodes!r}")


@lru_cache(maxsize=64)
def unit_legendre_rule(num_nodes):
    """Gauss-Legendre nodes and weights mapped to (0, 1).

    Parameters
    ----------
    num_nodes : int
        Number of quadrature points.

    Returns
    -------
    nodes, weights : ndarray
        Arrays of shape ``(num_nodes,)``; weights sum to 1.
    """
    _check_nodes(num_nodes)
    x, w = roots_legendre(num_nodes)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=64)
def normal_hermite_rule(num_nodes):
    """Gauss-Hermite nodes and weights for the standard normal weight.

    Uses the probabilists' convention: ``sum(w * g(z)) == E[g(Z)]`` for
    ``Z ~ N(0, 1)``, exactly when ``g`` is a polynomial of degree
    ``< 2 * num_nodes``.

    Returns
    -------
    nodes, weights : ndarray
        Arrays of shape ``(num_nodes,)``; weights sum to 1.
    """
    _check_nodes(num_nodes)
    z, w = roots_hermitenorm(num_nodes)
    weights = w / np.sqrt(2.0 * np.pi)
    z.setflags(write=False)
    weights.setflags(write=False)
    return z, weights


def tensor_rule(nodes, weights, ndim):
    """Tensor product of a one-dimensional rule over ``ndim`` coordinates.

    Returns
    -------
    points : ndarray of shape (num_nodes ** ndim, ndim)
    weights : ndarray of shape (num_nodes ** ndim,)
    """
    _check_nodes(ndim)
    grids = np.meshgrid(*([nodes] * ndim), indexing="ij")
    points = np.stack([g.reshape(-1) for g in grids], axis=1)
    wgrids = np.meshgrid(*([weights] * ndim), indexing="ij")
    joint = np.ones(points.shape[0])
    for g in wgrids:
        joint = joint * g.reshape(-1)
    return points, joint


def rule_moments(num_nodes):
    """First and second moments of the normal-score rule.

    Returns ``(m1, m2)`` with ``m1 = sum(w * z)`` and ``m2 = sum(w * z**2)``.
    Exact values are 0 and 1 for every ``num_nodes >= 2``; the computed
    values are used instead of the exact ones so every bound evaluation is
    an honest application of the finite rule.
    """
    z, w = normal_hermite_rule(num_nodes)
    return float(w @ z), float(w @ (z * z))
