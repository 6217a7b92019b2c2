"""Linear-Gaussian Bayesian network baseline.

Each node is normal with mean affine in its parents and constant noise
variance.  The joint is multivariate normal, so everything the benchmark
needs is closed form: fitting is per-family least squares, marginalizing
out hidden coordinates just drops them from (mean, covariance), and the
EM E-step is exact Gaussian conditioning.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import (
    InvalidInputError,
    OutOfRangeError,
    SingularDesignError,
    ValidationError,
)

__all__ = [
    "LinearGaussianBn",
    "fit_complete_lg",
    "joint_gaussian",
    "log_marginal_lg",
    "log_marginal_lg_rows",
    "em_fit_lg",
    "expected_moments",
    "family_ll_from_moments",
]

_LOG_2PI = np.log(2.0 * np.pi)

# Noise variances below this are clamped so log densities stay finite.
_VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class LinearGaussianBn:
    """Per-node affine-Gaussian conditionals on a DAG.

    Attributes
    ----------
    dag : Dag
    intercepts : tuple of float
    coefficients : tuple of tuples
        ``coefficients[i]`` aligns with ``dag.parents[i]``.
    variances : tuple of float, all > 0
    column_names : tuple of str
    """

    dag: object
    intercepts: tuple
    coefficients: tuple
    variances: tuple
    column_names: tuple

    def __post_init__(self):
        n = self.dag.num_vars
        intercepts = tuple(float(b) for b in self.intercepts)
        coefficients = tuple(tuple(float(c) for c in cs) for cs in self.coefficients)
        variances = tuple(float(v) for v in self.variances)
        names = tuple(str(c) for c in self.column_names)
        if not (len(intercepts) == len(coefficients) == len(variances) == len(names) == n):
            raise ValidationError("per-node parameter lists must all have num_vars entries")
        for i, cs in enumerate(coefficients):
            if len(cs) != len(self.dag.parents[i]):
                raise ValidationError(
                    f"node {i}: {len(cs)} coefficients for {len(self.dag.parents[i])} parents"
                )
        for i, v in enumerate(variances):
            if not np.isfinite(v) or v <= 0.0:
                raise ValidationError(f"node {i}: variance must be positive, got {v}")
        object.__setattr__(self, "intercepts", intercepts)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "column_names", names)

    @property
    def num_vars(self):
        return self.dag.num_vars


def _family_from_moments(mean, second, child, parents):
    """Least-squares family parameters from first/second moment matrices.

    ``mean`` is E[x] and ``second`` is E[x x^T] (both divided by the row
    count).  Returns (intercept, coefficients, ml_variance).  Solving the
    normal equations on moments is exactly OLS when the moments come from
    complete data, and the EM M-step when they are expected moments.
    """
    k = len(parents)
    if k == 0:
        variance = second[child, child] - mean[child] ** 2
        return float(mean[child]), (), max(float(variance), _VARIANCE_FLOOR)
    p = list(parents)
    gram = np.empty((k + 1, k + 1))
    gram[0, 0] = 1.0
    gram[0, 1:] = mean[p]
    gram[1:, 0] = mean[p]
    gram[1:, 1:] = second[np.ix_(p, p)]
    rhs = np.empty(k + 1)
    rhs[0] = mean[child]
    rhs[1:] = second[p, child]
    if np.linalg.matrix_rank(gram) < k + 1:
        raise SingularDesignError(
            f"collinear parents {tuple(parents)} for node {child}: design matrix is rank deficient"
        )
    theta = np.linalg.solve(gram, rhs)
    variance = second[child, child] - theta @ rhs
    return float(theta[0]), tuple(float(b) for b in theta[1:]), max(float(variance), _VARIANCE_FLOOR)


def _moments_from_complete(values):
    m = values.shape[0]
    mean = values.mean(axis=0)
    second = values.T @ values / m
    return mean, second


def fit_complete_lg(data, dag):
    """Per-family ordinary least squares with maximum-likelihood variances.

    Residuals are orthogonal to each family's regressors; every family's
    log-likelihood is >= the intercept-only fit of the same node.
    """
    if not data.fully_observed:
        raise InvalidInputError("fit_complete_lg requires fully observed data; use em_fit_lg")
    if data.num_cols != dag.num_vars:
        raise InvalidInputError(
            f"data has {data.num_cols} columns but the graph has {dag.num_vars} nodes"
        )
    max_family = max((len(ps) for ps in dag.parents), default=0) + 1
    if data.num_rows <= max_family + 1:
        raise InvalidInputError(
            f"need more than {max_family + 1} rows to fit families of size {max_family}"
        )
    mean, second = _moments_from_complete(data.values)
    intercepts, coefficients, variances = [], [], []
    for node in range(dag.num_vars):
        b0, bs, v = _family_from_moments(mean, second, node, dag.parents[node])
        intercepts.append(b0)
        coefficients.append(bs)
        variances.append(v)
    return LinearGaussianBn(
        dag=dag,
        intercepts=tuple(intercepts),
        coefficients=tuple(coefficients),
        variances=tuple(variances),
        column_names=data.column_names,
    )


def joint_gaussian(model):
    """Compile the network to its joint normal (mean, covariance).

    Moments propagate in topological order: a child's mean is affine in its
    parents' means; its covariance row is the same affine map of the
    parents' covariance rows plus its own noise variance on the diagonal.
    """
    n = model.num_vars
    mean = np.zeros(n)
    cov = np.zeros((n, n))
    for node in model.dag.topological_order:
        parents = list(model.dag.parents[node])
        beta0 = model.intercepts[node]
        if not parents:
            mean[node] = beta0
            cov[node, node] = model.variances[node]
            continue
        beta = np.asarray(model.coefficients[node])
        mean[node] = beta0 + beta @ mean[parents]
        row = beta @ cov[parents, :]
        cov[node, :] = row
        cov[:, node] = row
        cov[node, node] = model.variances[node] + beta @ cov[np.ix_(parents, parents)] @ beta
    return mean, cov


def _groups_by_pattern(observed):
    """Row indices grouped by identical observed pattern, deterministic order."""
    m = observed.shape[0]
    # Encode each pattern as bytes for hashing; order groups by first row.
    keys = [observed[i].tobytes() for i in range(m)]
    groups = {}
    for i, key in enumerate(keys):
        groups.setdefault(key, []).append(i)
    return [(observed[rows[0]], np.asarray(rows)) for rows in groups.values()]


def log_marginal_lg_rows(model, data):
    """Exact observed-coordinate log density per row.

    Hidden coordinates are integrated out by dropping them from the joint
    normal.  Rows with nothing observed contribute 0 (the integral of a
    density over everything).
    """
    if data.num_cols != model.num_vars:
        raise InvalidInputError(
            f"data has {data.num_cols} columns but the model has {model.num_vars} variables"
        )
    mean, cov = joint_gaussian(model)
    out = np.zeros(data.num_rows)
    for pattern, rows in _groups_by_pattern(data.observed):
        obs = np.nonzero(pattern)[0]
        if obs.size == 0:
            continue
        sub_mean = mean[obs]
        sub_cov = cov[np.ix_(obs, obs)]
        chol = np.linalg.cholesky(sub_cov)
        logdet = 2.0 * np.log(np.diag(chol)).sum()
        diff = data.values[np.ix_(rows, obs)] - sub_mean
        sol = solve_triangular(chol, diff.T, lower=True)
        quad = (sol * sol).sum(axis=0)
        out[rows] = -0.5 * (obs.size * _LOG_2PI + logdet + quad)
    return out


def log_marginal_lg(model, instance):
    """Log density of one row's observed coordinates (NaN marks hidden).

    Equals the exact integral of the joint density over the hidden ones.
    """
    x = np.asarray(instance, dtype=float).reshape(-1)
    if x.size != model.num_vars:
        raise InvalidInputError(f"expected {model.num_vars} coordinates, got {x.size}")
    observed = ~np.isnan(x)
    if not observed.any():
        raise InvalidInputError("instance has no observed coordinates")
    mean, cov = joint_gaussian(model)
    obs = np.nonzero(observed)[0]
    sub_cov = cov[np.ix_(obs, obs)]
    chol = np.linalg.cholesky(sub_cov)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    diff = x[obs] - mean[obs]
    sol = solve_triangular(chol, diff, lower=True)
    return float(-0.5 * (obs.size * _LOG_2PI + logdet + sol @ sol))


def expected_moments(model, data):
    """E-step: expected sums (S1, S2) of x and x x^T given observed cells.

    Hidden blocks are filled with their conditional means; S2 additionally
    receives each pattern's conditional covariance once per row.  Returns
    ``(s1, s2, num_rows)`` with sums not divided by the row count.
    """
    mean, cov = joint_gaussian(model)
    n = model.num_vars
    s1 = np.zeros(n)
    s2 = np.zeros((n, n))
    for pattern, rows in _groups_by_pattern(data.observed):
        obs = np.nonzero(pattern)[0]
        hid = np.nonzero(~pattern)[0]
        g = rows.size
        if hid.size == 0:
            block = data.values[rows]
            s1 += block.sum(axis=0)
            s2 += block.T @ block
            continue
        completed = np.empty((g, n))
        if obs.size == 0:
            completed[:] = mean
            cond_cov = cov
        else:
            factor = cho_factor(cov[np.ix_(obs, obs)], lower=True)
            x_obs = data.values[np.ix_(rows, obs)]
            diff = x_obs - mean[obs]
            gain = cho_solve(factor, cov[np.ix_(obs, hid)]).T  # (|H|, |O|)
            completed[:, obs] = x_obs
            completed[:, hid] = mean[hid] + diff @ gain.T
            cond_cov_h = cov[np.ix_(hid, hid)] - gain @ cov[np.ix_(obs, hid)]
            cond_cov = np.zeros((n, n))
            cond_cov[np.ix_(hid, hid)] = cond_cov_h
        s1 += completed.sum(axis=0)
        s2 += completed.T @ completed + g * cond_cov
    return s1, s2, data.num_rows


def family_ll_from_moments(mean, second, child, parents, num_rows):
    """Family's maximized (expected) log-likelihood given moment matrices.

    For complete-data moments this is the exact maximized conditional
    log-likelihood ``-M/2 (log(2 pi sigma^2) + 1)``; for expected moments
    it is the EM surrogate used by structure search under missingness.
    """
    _, _, variance = _family_from_moments(mean, second, child, parents)
    return -0.5 * num_rows * (_LOG_2PI + np.log(variance) + 1.0)


def em_fit_lg(data, dag, tol=1e-4, max_iters=200, history=None):
    """Fit under missing data by expectation-maximization.

    E-step: exact conditional first and second moments of each row's hidden
    coordinates given its observed ones (joint-normal conditioning, grouped
    by missing pattern).  M-step: per-family least squares on the expected
    moments.  Stops when the observed-data log-likelihood improves by less
    than ``tol`` or after ``max_iters`` iterations; the likelihood sequence
    is non-decreasing up to numerical slack.

    Parameters
    ----------
    history : list, optional
        If given, the observed-data log-likelihood after each M-step is
        appended to it.
    """
    if data.num_cols != dag.num_vars:
        raise InvalidInputError(
            f"data has {data.num_cols} columns but the graph has {dag.num_vars} nodes"
        )
    if tol <= 0:
        raise OutOfRangeError(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise OutOfRangeError(f"max_iters must be >= 1, got {max_iters}")
    if data.fully_observed:
        model = fit_complete_lg(data, dag)
        if history is not None:
            history.append(float(log_marginal_lg_rows(model, data).sum()))
        return model

    # Independent-Gaussian start from observed cells (coefficients zero).
    intercepts, variances = [], []
    for j in range(data.num_cols):
        col = data.values[data.observed[:, j], j]
        intercepts.append(float(col.mean()))
        variances.append(max(float(col.var()), _VARIANCE_FLOOR))
    model = LinearGaussianBn(
        dag=dag,
        intercepts=tuple(intercepts),
        coefficients=tuple(tuple(0.0 for _ in dag.parents[j]) for j in range(dag.num_vars)),
        variances=tuple(variances),
        column_names=data.column_names,
    )

    last_ll = -np.inf
    for _ in range(max_iters):
        s1, s2, m = expected_moments(model, data)
        mean = s1 / m
        second = s2 / m
        intercepts, coefficients, variances = [], [], []
        for node in range(dag.num_vars):
            b0, bs, v = _family_from_moments(mean, second, node, dag.parents[node])
            intercepts.append(b0)
            coefficients.append(bs)
            variances.append(v)
        model = LinearGaussianBn(
            dag=dag,
            intercepts=tuple(intercepts),
            coefficients=tuple(coefficients),
            variances=tuple(variances),
            column_names=data.column_names,
        )
        ll = float(log_marginal_lg_rows(model, data).sum())
        if history is not None:
            history.append(ll)
        if ll - last_ll < tol:
            break
        last_ll = ll
    return model
