"""Greedy structure search under two family scorers.

Best-ascent hill climbing over add/delete/reverse moves with a BIC
penalty; family scores decompose, so each move re-scores only the touched
families. The same engine serves the copula network (one parameter per
family) and the linear-Gaussian baseline (|parents| + 2 parameters per
family). On data with warped marginals the copula scorer sees the
dependence cleanly while a joint-Gaussian view is misspecified.
"""

import numpy as np

from copulabn.data import MaskedDataset, apply_missing_mask
from copulabn.structure import SearchConfig, greedy_search

rng = np.random.default_rng(5)


def edges(dag, names):
    return ", ".join(f"{names[p]}->{names[c]}" for p, c in dag.edges()) or "(none)"


# Ground truth: v -> w -> x -> y -> z chain, warped marginals.
num_rows, rho = 2000, 0.55
names = ("v", "w", "x", "y", "z")
z = np.empty((num_rows, 5))
z[:, 0] = rng.standard_normal(num_rows)
for j in range(1, 5):
    z[:, j] = rho * z[:, j - 1] + np.sqrt(1 - rho**2) * rng.standard_normal(num_rows)
warps = [np.exp(z[:, 0] / 2), z[:, 1] + 0.25 * z[:, 1] ** 3, z[:, 2],
         3 * z[:, 3] - 5, np.exp(z[:, 4] / 2)]
data = MaskedDataset.from_values(np.column_stack(warps), names)

print(f"truth: {' -> '.join(names)} (chain, edge correlation {rho})")
print()

for kind in ("cbn", "lgbn"):
    result = greedy_search(data, SearchConfig(max_parents=2), model_kind=kind)
    print(f"{kind} search (max_parents=2)")
    print(f"  edges : {edges(result.dag, names)}")
    print(f"  score : {result.score:,.1f}")
    print()

# The tree constraint caps every node at one parent.
tree = greedy_search(data, SearchConfig(tree_constraint=True))
print(f"tree-constrained search: {edges(tree.dag, names)}")
print()

# Independent columns: both scorers prefer the empty graph.
noise = MaskedDataset.from_values(np.random.default_rng(20).standard_normal((1500, 4)))
for kind in ("cbn", "lgbn"):
    result = greedy_search(noise, SearchConfig(), model_kind=kind)
    print(f"{kind} on independent noise: {result.dag.num_edges()} edges")
print()

# Search tolerates missing cells: the copula scorer integrates hidden
# coordinates out, the Gaussian scorer runs structural EM.
masked = apply_missing_mask(data, 0.15, seed=6)
for kind in ("cbn", "lgbn"):
    result = greedy_search(masked, SearchConfig(max_parents=2), model_kind=kind)
    print(f"{kind} at 15% missing: {edges(result.dag, names)}")
