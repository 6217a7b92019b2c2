"""Shared fixtures and synthetic-data generators for the test suite."""

from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
WINE_CSV = DATA_DIR / "wine_quality_red.csv"
CRIME_CSV = DATA_DIR / "communities_crime.csv"


def require_dataset(path):
    """Skip the calling test when a benchmark dataset has not been fetched."""
    if not path.exists():
        pytest.skip(
            f"{path.name} not present under data/; run scripts/fetch_datasets.py "
            "on a machine with network access and copy the result in"
        )
    return path


@pytest.fixture
def wine_path():
    return require_dataset(WINE_CSV)


@pytest.fixture
def crime_path():
    return require_dataset(CRIME_CSV)


def chain_scores(rho, num_vars, num_rows, rng):
    """Normal scores from a first-order chain: z_j = rho * z_{j-1} + noise.

    This is exactly a chain-structured network of bivariate Gaussian
    copulas (edge correlation rho) with standard normal marginals.
    """
    z = np.empty((num_rows, num_vars))
    z[:, 0] = rng.standard_normal(num_rows)
    sd = np.sqrt(1.0 - rho * rho)
    for j in range(1, num_vars):
        z[:, j] = rho * z[:, j - 1] + sd * rng.standard_normal(num_rows)
    return z


def equicorrelated_scores(rho, dim, num_rows, rng):
    """Normal scores with a uniform-correlation covariance."""
    cov = np.full((dim, dim), float(rho))
    np.fill_diagonal(cov, 1.0)
    chol = np.linalg.cholesky(cov)
    return rng.standard_normal((num_rows, dim)) @ chol.T


_WARPS = {
    "identity": lambda z: z,
    "skew": lambda z: np.exp(z / 2.0) + 0.3 * z,
    "cube": lambda z: z + 0.25 * z**3,
    "shift": lambda z: 3.0 * z - 5.0,
}


def warp_columns(z, kinds):
    """Apply per-column strictly monotone transforms.

    The transforms change the marginals (skewed, heavy-tailed, ...) while
    leaving the underlying copula untouched, which is what makes the
    copula-network model well specified and a joint-Gaussian fit not.
    """
    out = np.empty_like(z)
    for j, kind in enumerate(kinds):
        out[:, j] = _WARPS[kind](z[:, j])
    return out


def cycle_warps(num_cols):
    order = ["skew", "cube", "identity", "shift"]
    return [order[j % len(order)] for j in range(num_cols)]
