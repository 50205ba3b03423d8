"""Sparse operator algebra: per-predicate 0/1 adjacency matrices and chain products.

Every predicate p gets a |E| x |E| CSR matrix M_p with entry (i, j) = 1 iff the
triple (e_i, p, e_j) is in the graph, plus a reserved identity operator at
operator index 0 (predicate p therefore sits at operator index p + 1). Left
vector-matrix products over these operators simulate rule application: the j-th
entry of v_h^T M_p1 ... M_pl counts the distinct paths h -> ... -> j whose i-th
edge carries predicate p_i. State vectors are plain dense float arrays.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .kg import KnowledgeGraph

IDENTITY_OP = 0
# marker for an identity hop inside a model-side hop sequence
IDENTITY_HOP = -1


@dataclass(frozen=True)
class RulePattern:
    """Ordered predicate hops of a candidate rule body.

    Indicator patterns never contain identity hops; model-side sequences may
    use IDENTITY_HOP (-1), which propagation treats as a no-op.
    """

    hops: tuple[int, ...]

    def __post_init__(self):
        if not self.hops:
            raise ValueError("empty rule pattern")

    def __len__(self):
        return len(self.hops)

    def names(self, kg: KnowledgeGraph) -> tuple[str, ...]:
        return tuple(
            "<identity>" if p == IDENTITY_HOP else kg.predicates[p] for p in self.hops
        )


@dataclass(frozen=True)
class Operator:
    """One adjacency operator; `predicate` is the operator-axis index (0 = identity)."""

    predicate: int
    matrix: sparse.csr_array


class OperatorSet:
    """Identity plus one adjacency operator per predicate, with combination helpers."""

    def __init__(self, kg: KnowledgeGraph):
        n = kg.num_entities
        self.num_entities = n
        self.num_predicates = kg.num_predicates
        mats = [sparse.eye_array(n, dtype=np.float64, format="csr")]
        for p in range(kg.num_predicates):
            edges = kg.per_predicate[p]
            if edges:
                rows = np.fromiter((h for h, _ in edges), dtype=np.int64)
                cols = np.fromiter((t for _, t in edges), dtype=np.int64)
                data = np.ones(len(edges), dtype=np.float64)
                m = sparse.csr_array((data, (rows, cols)), shape=(n, n))
            else:
                m = sparse.csr_array((n, n), dtype=np.float64)
            mats.append(m)
        self.matrices = mats
        self.matrices_t = [m.T.tocsr() for m in mats]
        self._combo = None
        self._combo_t = None

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, op_index: int) -> Operator:
        return Operator(op_index, self.matrices[op_index])

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def matrix(self, op_index: int) -> sparse.csr_array:
        return self.matrices[op_index]

    def predicate_matrix(self, predicate: int) -> sparse.csr_array:
        return self.matrices[predicate + 1]

    def diagonals(self) -> np.ndarray:
        """(num_ops, |E|) array of operator diagonals (self-loop indicators)."""
        return np.stack([m.diagonal() for m in self.matrices])

    def _template(self, transpose):
        n = self.num_entities
        rows, cols, ops = [], [], []
        for k, m in enumerate(self.matrices):
            coo = m.tocoo()
            r, c = (coo.col, coo.row) if transpose else (coo.row, coo.col)
            rows.append(r.astype(np.int64))
            cols.append(c.astype(np.int64))
            ops.append(np.full(coo.nnz, k, dtype=np.int64))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        ops = np.concatenate(ops)
        key = rows * n + cols
        uniq, inv = np.unique(key, return_inverse=True)
        indices = (uniq % n).astype(np.int32)
        indptr = np.searchsorted(uniq // n, np.arange(n + 1)).astype(np.int64)
        return {"ops": ops, "inv": inv, "indices": indices, "indptr": indptr,
                "nnz": len(uniq)}

    def combine(self, weights: np.ndarray) -> sparse.csr_array:
        """Weighted sum over all operators, sum_k weights[k] * M_k, as one CSR."""
        if self._combo is None:
            self._combo = self._template(transpose=False)
        return self._combine_from(self._combo, weights)

    def combine_t(self, weights: np.ndarray) -> sparse.csr_array:
        """Transpose of combine(weights) (for reverse-mode propagation)."""
        if self._combo_t is None:
            self._combo_t = self._template(transpose=True)
        return self._combine_from(self._combo_t, weights)

    def _combine_from(self, tpl, weights):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (len(self.matrices),):
            raise ValueError(
                f"expected {len(self.matrices)} operator weights, got {weights.shape}"
            )
        data = np.bincount(tpl["inv"], weights=weights[tpl["ops"]], minlength=tpl["nnz"])
        n = self.num_entities
        return sparse.csr_array(
            (data, tpl["indices"], tpl["indptr"]), shape=(n, n), copy=False
        )


def build_operators(kg: KnowledgeGraph) -> OperatorSet:
    """One operator per predicate plus the identity at operator index 0."""
    return OperatorSet(kg)


def propagate(state: np.ndarray, op: Operator) -> np.ndarray:
    """Left vector-matrix product state^T M; entry j = sum_i state[i] * M[i, j]."""
    state = np.asarray(state, dtype=np.float64)
    return state @ op.matrix


def count_paths(ops, h: int, pattern: RulePattern, t: int, excluded_edge=None) -> int:
    """Number of distinct entity sequences h -> ... -> t realizing `pattern`.

    `excluded_edge` is an (h, q, t) triple whose exact labeled edge paths may
    not traverse (used for the direct-edge convention and filtered evaluation);
    an edge absent from the graph excludes nothing. Accepts a KnowledgeGraph or
    a prebuilt OperatorSet.
    """
    if isinstance(ops, KnowledgeGraph):
        ops = OperatorSet(ops)
    excl = None
    if excluded_edge is not None:
        eh, eq, et = excluded_edge
        if ops.predicate_matrix(eq)[eh, et] != 0:
            excl = (eh, eq, et)
    u = np.zeros(ops.num_entities)
    u[h] = 1.0
    for hop in pattern.hops:
        if hop == IDENTITY_HOP:
            continue
        nxt = u @ ops.predicate_matrix(hop)
        if excl is not None and hop == excl[1]:
            nxt[excl[2]] -= u[excl[0]]
        u = nxt
    return int(round(u[t]))


def enumerate_patterns(num_predicates: int, min_len: int, max_len: int):
    """All predicate tuples of length min_len..max_len, shorter first, lexicographic."""
    if not 1 <= min_len <= max_len:
        raise ValueError(f"invalid length range [{min_len}, {max_len}]")
    for length in range(min_len, max_len + 1):
        for hops in itertools.product(range(num_predicates), repeat=length):
            yield RulePattern(hops)
