"""Directed acyclic graphs over variable indices.

A :class:`Dag` stores one ordered parent tuple per node.  Instances are
immutable; structure search manipulates plain parent-set lists and builds a
``Dag`` from the result.
"""

from dataclasses import dataclass
from functools import cached_property

from .errors import ValidationError

__all__ = ["Dag"]


@dataclass(frozen=True)
class Dag:
    """Parent lists of a directed acyclic graph.

    Attributes
    ----------
    num_vars : int
        Number of nodes; indices run from 0 to ``num_vars - 1``.
    parents : tuple of tuples
        ``parents[i]`` are node i's parent indices, in the order the
        family's copula expects them.
    """

    num_vars: int
    parents: tuple

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValidationError(f"graph needs at least one node, got {self.num_vars}")
        parents = tuple(tuple(int(p) for p in ps) for ps in self.parents)
        if len(parents) != self.num_vars:
            raise ValidationError(
                f"expected {self.num_vars} parent lists, got {len(parents)}"
            )
        for i, ps in enumerate(parents):
            if len(set(ps)) != len(ps):
                raise ValidationError(f"node {i} has duplicate parents {ps}")
            for p in ps:
                if p == i:
                    raise ValidationError(f"node {i} lists itself as a parent")
                if not 0 <= p < self.num_vars:
                    raise ValidationError(f"node {i} has out-of-range parent {p}")
        object.__setattr__(self, "parents", parents)
        self.topological_order  # acyclicity check happens here

    @classmethod
    def empty(cls, num_vars):
        """Graph with no edges."""
        return cls(num_vars, tuple(() for _ in range(num_vars)))

    @classmethod
    def from_edges(cls, num_vars, edges):
        """Build from (parent, child) pairs; parent order follows edge order."""
        parents = [[] for _ in range(num_vars)]
        for parent, child in edges:
            if not 0 <= child < num_vars:
                raise ValidationError(f"edge ({parent}, {child}) has out-of-range child")
            parents[child].append(parent)
        return cls(num_vars, tuple(tuple(ps) for ps in parents))

    @classmethod
    def chain(cls, num_vars):
        """0 -> 1 -> ... -> num_vars-1."""
        return cls.from_edges(num_vars, [(i, i + 1) for i in range(num_vars - 1)])

    @cached_property
    def topological_order(self):
        """Node order with every parent before its children (Kahn's algorithm,
        smallest index first for determinism)."""
        remaining = {i: set(ps) for i, ps in enumerate(self.parents)}
        children = [[] for _ in range(self.num_vars)]
        for i, ps in enumerate(self.parents):
            for p in ps:
                children[p].append(i)
        ready = sorted(i for i, ps in remaining.items() if not ps)
        order = []
        while ready:
            node = ready.pop(0)
            order.append(node)
            newly = []
            for ch in children[node]:
                remaining[ch].discard(node)
                if not remaining[ch] and ch not in order and ch not in ready and ch not in newly:
                    newly.append(ch)
            ready = sorted(ready + newly)
        if len(order) != self.num_vars:
            raise ValidationError("graph contains a directed cycle")
        return tuple(order)

    def edges(self):
        """All (parent, child) pairs, sorted."""
        return sorted((p, c) for c, ps in enumerate(self.parents) for p in ps)

    def skeleton(self):
        """Undirected edge set as frozenset of sorted pairs."""
        return frozenset(tuple(sorted((p, c))) for p, c in self.edges())

    def num_edges(self):
        return sum(len(ps) for ps in self.parents)
