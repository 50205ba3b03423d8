"""Structural indicators: reasoning saturation and bifurcation.

Saturation asks how well a candidate rule pattern explains the edges of a
query predicate: the macro fraction counts triplets reachable through at least
one path of the pattern, the micro fraction averages each triplet's share of
pattern paths among all connecting paths up to the length cap, and the
comprehensive value is their product. Bifurcation profiles the multi-target
pressure of a predicate: the fraction of heads (or tails) with at least
lambda neighbors.

By default, path search for a triplet (h, q, t) excludes the triplet's own
edge from traversal so a pattern containing q cannot explain the edge with
itself; pass exclude_direct_edge=False for literal inclusion. Both conventions
are exact, not sampled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .kg import KnowledgeGraph, fw_degree, bw_degree
from .operators import OperatorSet, RulePattern, count_paths

log = logging.getLogger(__name__)

# complexity guardrail for full saturation scans, in |P|^(L+1) * |G| units
DEFAULT_COST_BUDGET = 2e9

FORWARD = "forward"
BACKWARD = "backward"


class EmptySubgraphError(ValueError):
    """The predicate has no edges, so the indicator is undefined."""


class CostBudgetError(RuntimeError):
    """A full saturation scan would exceed the configured cost budget."""


@dataclass(frozen=True)
class SaturationRecord:
    pattern: RulePattern
    predicate: int
    gamma: float
    delta: float
    eta: float


@dataclass(frozen=True)
class BifurcationRecord:
    predicate: int
    direction: str
    proportions: dict[int, float]


def estimate_cost(kg: KnowledgeGraph, max_len: int) -> float:
    return float(kg.num_predicates) ** (max_len + 1) * len(kg.triples)


def _triplet_arrays(kg, predicate=None):
    triples = (
        kg.triples
        if predicate is None
        else [(h, p, t) for h, p, t in kg.triples if p == predicate]
    )
    hs = np.fromiter((h for h, _, _ in triples), dtype=np.int64, count=len(triples))
    qs = np.fromiter((p for _, p, _ in triples), dtype=np.int64, count=len(triples))
    ts = np.fromiter((t for _, _, t in triples), dtype=np.int64, count=len(triples))
    return hs, qs, ts


def _extract_pairs(mat_csr, rows, cols):
    if len(rows) == 0:
        return np.zeros(0)
    return np.asarray(mat_csr[rows, cols]).ravel().astype(np.float64)


def _adjusted_counts(ops, pattern, chain, hs, qs, ts, exclude, diags):
    """Per-triplet path counts for `pattern`, honoring the direct-edge convention.

    For length-2 patterns the exclusion is a closed-form correction on the
    chain product: a path can only reuse the triplet's own edge through a
    self-loop on its other hop. Longer patterns fall back to exact per-triplet
    frontier propagation with the edge removed.
    """
    hops = pattern.hops
    if not exclude:
        return _extract_pairs(chain, hs, ts)
    if len(hops) == 2:
        raw = _extract_pairs(chain, hs, ts)
        p1, p2 = hops
        use1 = (qs == p1).astype(np.float64)
        use2 = (qs == p2).astype(np.float64)
        raw -= use1 * diags[p2 + 1][ts]
        raw -= use2 * diags[p1 + 1][hs]
        raw += use1 * use2 * (hs == ts)
        return raw
    out = np.empty(len(hs))
    for i in range(len(hs)):
        out[i] = count_paths(
            ops, int(hs[i]), pattern, int(ts[i]), excluded_edge=(int(hs[i]), int(qs[i]), int(ts[i]))
        )
    return out


def _pattern_stream(ops, max_len):
    """Yield (pattern, chain product CSR) for every pattern of length 2..max_len."""

    def rec(prefix, mat):
        for p in range(ops.num_predicates):
            m2 = mat @ ops.predicate_matrix(p)
            pat = prefix + (p,)
            if len(pat) >= 2:
                yield RulePattern(pat), m2
            if len(pat) < max_len:
                yield from rec(pat, m2)

    for p0 in range(ops.num_predicates):
        yield from rec((p0,), ops.predicate_matrix(p0))


def _scan_counts(kg, ops, max_len, hs, qs, ts, exclude):
    diags = ops.diagonals()
    for pattern, chain in _pattern_stream(ops, max_len):
        yield pattern, _adjusted_counts(ops, pattern, chain, hs, qs, ts, exclude, diags)


def macro_saturation(
    kg: KnowledgeGraph,
    pattern: RulePattern,
    predicate: int,
    *,
    exclude_direct_edge: bool = True,
    ops: OperatorSet | None = None,
) -> float:
    """Fraction of (h, predicate, t) triplets connected by at least one pattern path."""
    n_q = kg.num_edges(predicate)
    if n_q == 0:
        raise EmptySubgraphError(f"empty subgraph for predicate {predicate}")
    ops = ops or OperatorSet(kg)
    hs, qs, ts = _triplet_arrays(kg, predicate)
    chain = None
    if not (exclude_direct_edge and len(pattern) > 2):
        chain = _chain_product(ops, pattern)
    counts = _adjusted_counts(
        ops, pattern, chain, hs, qs, ts, exclude_direct_edge, ops.diagonals()
    )
    return float(np.count_nonzero(counts > 0)) / n_q


def micro_saturation(
    kg: KnowledgeGraph,
    pattern: RulePattern,
    predicate: int,
    max_len: int,
    *,
    exclude_direct_edge: bool = True,
    ops: OperatorSet | None = None,
) -> float:
    """Mean per-triplet share of pattern paths among all paths of length <= max_len.

    Triplets with no connecting path at all contribute share 0 (the average
    still divides by the full subgraph edge count).
    """
    if len(pattern) > max_len:
        raise ValueError(f"pattern length {len(pattern)} exceeds max_len {max_len}")
    n_q = kg.num_edges(predicate)
    if n_q == 0:
        raise EmptySubgraphError(f"empty subgraph for predicate {predicate}")
    ops = ops or OperatorSet(kg)
    hs, qs, ts = _triplet_arrays(kg, predicate)
    totals = np.zeros(len(hs))
    wanted = None
    for pat, counts in _scan_counts(kg, ops, max_len, hs, qs, ts, exclude_direct_edge):
        totals += counts
        if pat.hops == pattern.hops:
            wanted = counts
    if wanted is None:
        raise ValueError("pattern not covered by the scan (check predicate indices)")
    shares = np.divide(wanted, totals, out=np.zeros_like(wanted), where=totals > 0)
    return float(shares.mean())


def comprehensive_saturation(gamma: float, delta: float) -> float:
    if not (0.0 <= gamma <= 1.0 and 0.0 <= delta <= 1.0):
        raise ValueError("saturations must lie in [0, 1]")
    return gamma * delta


def _chain_product(ops, pattern):
    mat = ops.predicate_matrix(pattern.hops[0])
    for p in pattern.hops[1:]:
        mat = mat @ ops.predicate_matrix(p)
    return mat


def bifurcation(
    kg: KnowledgeGraph, predicate: int, direction: str = FORWARD, lambda_max: int = 7
) -> BifurcationRecord:
    """Proportion of heads (forward) or tails (backward) with >= lambda q-neighbors."""
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"unknown direction {direction!r}")
    if kg.num_edges(predicate) == 0:
        raise EmptySubgraphError(f"empty subgraph for predicate {predicate}")
    if direction == FORWARD:
        degs = [fw_degree(kg, predicate, v) for v in kg.heads(predicate)]
    else:
        degs = [bw_degree(kg, predicate, v) for v in kg.tails(predicate)]
    degs = np.asarray(degs)
    proportions = {
        lam: float(np.count_nonzero(degs >= lam)) / len(degs)
        for lam in range(1, lambda_max + 1)
    }
    return BifurcationRecord(predicate, direction, proportions)


def sample_subgraph(
    kg: KnowledgeGraph, seed: int, target_triple_count: int
) -> KnowledgeGraph:
    """Uniform triple sample without replacement; keeps the parent vocabularies."""
    n = len(kg.triples)
    if target_triple_count > n:
        raise ValueError(f"cannot sample {target_triple_count} of {n} triples")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=target_triple_count, replace=False))
    triples = [kg.triples[i] for i in idx]
    return KnowledgeGraph(kg.entities, kg.predicates, triples)


def saturation_report(
    kg: KnowledgeGraph,
    max_len: int = 2,
    top_n: int = 5,
    *,
    exclude_direct_edge: bool = True,
    budget: float | None = DEFAULT_COST_BUDGET,
    predicates=None,
    ops: OperatorSet | None = None,
) -> list[SaturationRecord]:
    """Top rule patterns per predicate, ranked by comprehensive saturation.

    Covers every pattern of length 2..max_len against every predicate (or the
    given subset), skipping empty subgraphs with a warning. Guarded by the
    |P|^(L+1) * |G| cost estimate; sample the graph or raise the budget for
    large inputs.
    """
    if budget is not None and estimate_cost(kg, max_len) > budget:
        raise CostBudgetError(
            f"saturation scan cost {estimate_cost(kg, max_len):.2e} exceeds budget "
            f"{budget:.2e}; sample the graph (sample_subgraph) or raise the budget"
        )
    ops = ops or OperatorSet(kg)
    wanted = list(range(kg.num_predicates)) if predicates is None else list(predicates)
    active = []
    for q in wanted:
        if kg.num_edges(q) == 0:
            log.warning("skipping predicate %s: empty subgraph", kg.predicates[q])
        else:
            active.append(q)
    if not active:
        return []

    hs, qs, ts = _triplet_arrays(kg)
    keep = np.isin(qs, active)
    hs, qs, ts = hs[keep], qs[keep], ts[keep]
    nq = np.bincount(qs, minlength=kg.num_predicates).astype(np.float64)

    totals = np.zeros(len(hs))
    for _, counts in _scan_counts(kg, ops, max_len, hs, qs, ts, exclude_direct_edge):
        totals += counts

    by_pred: dict[int, list[SaturationRecord]] = {q: [] for q in active}
    for pattern, counts in _scan_counts(kg, ops, max_len, hs, qs, ts, exclude_direct_edge):
        shares = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
        gamma_q = np.bincount(qs, weights=counts > 0, minlength=kg.num_predicates)
        delta_q = np.bincount(qs, weights=shares, minlength=kg.num_predicates)
        for q in active:
            gamma = gamma_q[q] / nq[q]
            delta = delta_q[q] / nq[q]
            by_pred[q].append(
                SaturationRecord(pattern, q, gamma, delta, gamma * delta)
            )

    out: list[SaturationRecord] = []
    for q in active:
        ranked = sorted(by_pred[q], key=lambda r: (-r.eta, -r.gamma, r.pattern.hops))
        out.extend(ranked[:top_n])
    return out


# ---------------------------------------------------------------------------
# report rendering

def pattern_label(pattern: RulePattern, kg: KnowledgeGraph) -> str:
    return " & ".join(pattern.names(kg))


def saturation_tsv(records, kg) -> str:
    lines = ["pattern\tpredicate\tgamma\tdelta\teta"]
    for r in records:
        lines.append(
            f"{','.join(r.pattern.names(kg))}\t"
            f"{kg.predicates[r.predicate]}\t{r.gamma!r}\t{r.delta!r}\t{r.eta!r}"
        )
    return "\n".join(lines) + "\n"


def saturation_table(records, kg) -> str:
    """Aligned text table, one block per predicate, eta-descending rows."""
    if not records:
        return "(no saturation records)\n"
    width = max(len(pattern_label(r.pattern, kg)) for r in records)
    lines = []
    current = None
    for r in records:
        if r.predicate != current:
            if current is not None:
                lines.append("")
            lines.append(f"=> {kg.predicates[r.predicate]}")
            current = r.predicate
        lines.append(
            f"  {pattern_label(r.pattern, kg):<{width}}  "
            f"gamma={r.gamma:.2f}  delta={r.delta:.2f}  eta={r.eta:.2f}"
        )
    return "\n".join(lines) + "\n"


def bifurcation_tsv(records, kg) -> str:
    lines = ["predicate\tdirection\tlambda\tproportion"]
    for r in records:
        for lam in sorted(r.proportions):
            lines.append(
                f"{kg.predicates[r.predicate]}\t{r.direction}\t{lam}\t{r.proportions[lam]!r}"
            )
    return "\n".join(lines) + "\n"


def bifurcation_table(records, kg) -> str:
    """Percentages (rounded) per predicate row, one column per lambda."""
    if not records:
        return "(no bifurcation records)\n"
    lams = sorted({lam for r in records for lam in r.proportions})
    width = max(len(kg.predicates[r.predicate]) for r in records)
    header = " " * (width + 2) + "".join(f"{'l=' + str(lam):>8}" for lam in lams)
    lines = [header]
    for r in records:
        cells = "".join(
            f"{round(100 * r.proportions[lam]):>8}" if lam in r.proportions else f"{'-':>8}"
            for lam in lams
        )
        lines.append(f"{kg.predicates[r.predicate]:<{width}} ({r.direction[0]})" + cells)
    return "\n".join(lines) + "\n"
