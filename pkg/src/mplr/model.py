"""Differentiable multi-target rule reasoner over sparse relational operators.

A query predicate is embedded and fed (at every step) through R independent
bidirectional recurrent cells; each step's concatenated hidden states pass
through a shared linear projection and softmax, yielding per-hop attention
distributions over the |P|+1 operators (identity first). Scoring propagates a
one-hot head vector through the attention-weighted operator sum for L hops
while a per-target correction recurrence tracks, and finally subtracts, the
score mass a target receives from traversing its own direct edge - the
multi-target replacement for deleting edges from the graph.

All gradients are exact reverse-mode, hand-derived, and validated against
central finite differences in the test suite. Everything is deterministic
given the seed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .kg import MultiTargetQuery
from .operators import OperatorSet, RulePattern, IDENTITY_OP

GATE_ORDER = "ifgo"  # slices of the fused 4*hidden gate tensors

CORRECTED = "corrected"
LITERAL = "literal"
EPSILON_MODES = (CORRECTED, LITERAL)
NORMALIZE_MODES = (None, "l1", "l2")


def sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(x):
    z = x - np.max(x)
    e = np.exp(z)
    return e / e.sum()


class ModelParams:
    """All trainable state: query embeddings, R bidirectional cells, shared projection.

    Tensors live in an ordered dict so optimizers and gradient checks can
    iterate them generically. Gate weights are fused (input, forget, candidate,
    output); forget biases start at 1.0, everything else from symmetric uniform
    ranges scaled by fan-in, all drawn from the seed.
    """

    def __init__(
        self,
        num_predicates,
        rank=3,
        max_len=2,
        embed_dim=128,
        hidden_dim=128,
        seed=0,
        normalize="l2",
        epsilon_mode=CORRECTED,
    ):
        if normalize not in NORMALIZE_MODES:
            raise ValueError(f"normalize must be one of {NORMALIZE_MODES}")
        if epsilon_mode not in EPSILON_MODES:
            raise ValueError(f"epsilon_mode must be one of {EPSILON_MODES}")
        if min(num_predicates, rank, max_len, embed_dim, hidden_dim) < 1:
            raise ValueError("all model dimensions must be positive")
        self.num_predicates = num_predicates
        self.rank = rank
        self.max_len = max_len
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.seed = seed
        self.normalize = normalize
        self.epsilon_mode = epsilon_mode

        rng = np.random.default_rng(seed)

        def uniform(shape, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        dh, de = hidden_dim, embed_dim
        self.tensors: dict[str, np.ndarray] = {}
        self.tensors["query_emb"] = uniform((num_predicates, de), de)
        for r in range(rank):
            for direction in ("fwd", "bwd"):
                self.tensors[f"cell{r}_{direction}_Wx"] = uniform((de, 4 * dh), de)
                self.tensors[f"cell{r}_{direction}_Wh"] = uniform((dh, 4 * dh), dh)
                b = np.zeros(4 * dh)
                b[dh : 2 * dh] = 1.0
                self.tensors[f"cell{r}_{direction}_b"] = b
        self.tensors["proj_W"] = uniform((2 * dh, num_predicates + 1), 2 * dh)
        self.tensors["proj_b"] = np.zeros(num_predicates + 1)

    @property
    def num_operators(self):
        return self.num_predicates + 1

    def zero_grads(self):
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    def copy(self):
        dup = ModelParams.__new__(ModelParams)
        dup.__dict__.update(self.__dict__)
        dup.tensors = {k: v.copy() for k, v in self.tensors.items()}
        return dup

    def meta(self):
        return {
            "num_predicates": self.num_predicates,
            "rank": self.rank,
            "max_len": self.max_len,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
            "seed": self.seed,
            "normalize": self.normalize,
            "epsilon_mode": self.epsilon_mode,
            "gate_order": GATE_ORDER,
        }


def save_checkpoint(params: ModelParams, path) -> None:
    """Self-describing container: hyperparameters plus every tensor, bit-exact."""
    meta = json.dumps(params.meta()).encode()
    with open(path, "wb") as fh:
        np.savez(
            fh,
            __meta__=np.frombuffer(meta, dtype=np.uint8),
            **params.tensors,
        )


def load_checkpoint(path) -> ModelParams:
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"].tobytes()))
        gate_order = meta.pop("gate_order")
        if gate_order != GATE_ORDER:
            raise ValueError(f"checkpoint gate order {gate_order!r} unsupported")
        params = ModelParams(**meta)
        for key in params.tensors:
            params.tensors[key] = data[key].copy()
    return params


@dataclass
class AttentionTensor:
    """Per-rank, per-hop distributions over the |P|+1 operators (identity at 0)."""

    weights: np.ndarray  # (R, L, |P|+1)

    def __post_init__(self):
        if self.weights.ndim != 3:
            raise ValueError("attention tensor must be rank x hops x operators")

    @property
    def rank(self):
        return self.weights.shape[0]

    @property
    def max_len(self):
        return self.weights.shape[1]


def _lstm_step(x, h_prev, c_prev, Wx, Wh, b, dh):
    z = x @ Wx + h_prev @ Wh + b
    i = sigmoid(z[:dh])
    f = sigmoid(z[dh : 2 * dh])
    g = np.tanh(z[2 * dh : 3 * dh])
    o = sigmoid(z[3 * dh :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (i, f, g, o, tc, c_prev, h_prev)


def _run_cell(params, r, direction, x, steps):
    dh = params.hidden_dim
    Wx = params.tensors[f"cell{r}_{direction}_Wx"]
    Wh = params.tensors[f"cell{r}_{direction}_Wh"]
    b = params.tensors[f"cell{r}_{direction}_b"]
    h = np.zeros(dh)
    c = np.zeros(dh)
    hs, caches = [], []
    for _ in range(steps):
        h, c, cache = _lstm_step(x, h, c, Wx, Wh, b, dh)
        hs.append(h)
        caches.append(cache)
    return hs, caches


def _attention_forward(params: ModelParams, query: int):
    """Attention weights plus the cache needed for reverse mode.

    Hop i (1-based) reads the forward state after i steps concatenated with
    the backward state after L-i steps; "after 0 steps" is the zero initial
    state, so the deepest hop sees only the forward direction.
    """
    L = params.max_len
    x = params.tensors["query_emb"][query]
    W, b = params.tensors["proj_W"], params.tensors["proj_b"]
    weights = np.empty((params.rank, L, params.num_operators))
    cache = {"x": x, "query": query, "ranks": []}
    dh = params.hidden_dim
    for r in range(params.rank):
        fwd_h, fwd_caches = _run_cell(params, r, "fwd", x, L)
        bwd_h, bwd_caches = _run_cell(params, r, "bwd", x, L)
        att_in = []
        for l in range(L):
            j = L - 1 - l
            back = bwd_h[j - 1] if j >= 1 else np.zeros(dh)
            att_in.append(np.concatenate([fwd_h[l], back]))
            weights[r, l] = softmax(att_in[l] @ W + b)
        cache["ranks"].append(
            {"fwd": fwd_caches, "bwd": bwd_caches, "att_in": att_in}
        )
    cache["weights"] = weights
    return weights, cache


def attention_forward(params: ModelParams, query: int) -> AttentionTensor:
    weights, _ = _attention_forward(params, query)
    return AttentionTensor(weights)


def _cell_backward(params, r, direction, x, caches, dh_steps, dc_final=None):
    """BPTT through one direction; dh_steps[i] is the external grad on step i's h."""
    dh = params.hidden_dim
    Wx = params.tensors[f"cell{r}_{direction}_Wx"]
    Wh = params.tensors[f"cell{r}_{direction}_Wh"]
    gWx = np.zeros_like(Wx)
    gWh = np.zeros_like(Wh)
    gb = np.zeros(4 * dh)
    dx = np.zeros_like(x)
    dh_carry = np.zeros(dh)
    dc_carry = np.zeros(dh) if dc_final is None else dc_final
    for step in reversed(range(len(caches))):
        i, f, g, o, tc, c_prev, h_prev = caches[step]
        dh_total = dh_steps[step] + dh_carry
        do = dh_total * tc
        dc = dh_total * o * (1.0 - tc * tc) + dc_carry
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_carry = dc * f
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)]
        )
        gWx += np.outer(x, dz)
        gWh += np.outer(h_prev, dz)
        gb += dz
        dx += dz @ Wx.T
        dh_carry = dz @ Wh.T
    return gWx, gWh, gb, dx


def _attention_backward(params, cache, dA, grads):
    """Accumulate parameter grads given dL/d(attention weights) of shape (R, L, K)."""
    L = params.max_len
    dh = params.hidden_dim
    W = params.tensors["proj_W"]
    x = cache["x"]
    query = cache["query"]
    for r in range(params.rank):
        rc = cache["ranks"][r]
        dfwd = [np.zeros(dh) for _ in range(L)]
        dbwd = [np.zeros(dh) for _ in range(L)]
        for l in range(L):
            a = cache["weights"][r, l]
            dAl = dA[r, l]
            dlogits = a * (dAl - np.dot(dAl, a))
            grads["proj_W"] += np.outer(rc["att_in"][l], dlogits)
            grads["proj_b"] += dlogits
            dhid = W @ dlogits
            dfwd[l] += dhid[:dh]
            j = L - 1 - l
            if j >= 1:
                dbwd[j - 1] += dhid[dh:]
        for direction, dsteps, step_caches in (
            ("fwd", dfwd, rc["fwd"]),
            ("bwd", dbwd, rc["bwd"]),
        ):
            gWx, gWh, gb, dx = _cell_backward(
                params, r, direction, x, step_caches, dsteps
            )
            grads[f"cell{r}_{direction}_Wx"] += gWx
            grads[f"cell{r}_{direction}_Wh"] += gWh
            grads[f"cell{r}_{direction}_b"] += gb
            grads["query_emb"][query] += dx


# ---------------------------------------------------------------------------
# scoring

def logit_loss(s, v):
    """Stabilized multi-label Bernoulli negative log-likelihood with logits."""
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if s.shape != v.shape:
        raise ValueError(f"shape mismatch {s.shape} vs {v.shape}")
    if not (np.isfinite(s).all() and np.isfinite(v).all()):
        raise ValueError("non-finite input to loss")
    return float(np.sum(np.maximum(s, 0.0) - v * s + np.log1p(np.exp(-np.abs(s)))))


def logit_loss_grad(s, v):
    return sigmoid(np.asarray(s, dtype=np.float64)) - v


def _norm_divisors(u_last, normalize):
    if normalize is None:
        return None, np.ones(u_last.shape[0])
    if normalize == "l2":
        n = np.sqrt(np.einsum("be,be->b", u_last, u_last))
    elif normalize == "l1":
        n = np.abs(u_last).sum(axis=1)
    else:
        raise ValueError(f"unknown normalize mode {normalize!r}")
    return n, np.where(n > 0, n, 1.0)


class _GroupForward:
    """Forward pass for a set of queries sharing one predicate (and attention).

    Rows of U are queries; rows of the correction recurrence Eps are
    (query, target) pairs, flattened. Everything needed for reverse mode is
    kept: per-hop states, per-rank weighted operators, norms, predictions.
    """

    def __init__(self, ops, weights, query, heads, target_lists,
                 epsilon_mode=CORRECTED, normalize=None):
        R, L, K = weights.shape
        if K != ops.num_predicates + 1:
            raise ValueError(
                f"attention over {K} operators does not match graph with "
                f"{ops.num_predicates} predicates"
            )
        E = ops.num_entities
        heads = np.asarray(heads, dtype=np.int64)
        B = len(heads)
        t_qrow = np.concatenate(
            [np.full(len(ts), i, dtype=np.int64) for i, ts in enumerate(target_lists)]
        ) if target_lists else np.zeros(0, dtype=np.int64)
        t_ent = np.concatenate(
            [np.asarray(ts, dtype=np.int64) for ts in target_lists]
        ) if target_lists else np.zeros(0, dtype=np.int64)

        self.ops, self.weights, self.query = ops, weights, query
        self.heads, self.t_qrow, self.t_ent = heads, t_qrow, t_ent
        self.epsilon_mode, self.normalize = epsilon_mode, normalize
        self.q_op = query + 1
        Bt = len(t_ent)
        rows = np.arange(Bt)

        self.W = [[None] * (L + 1) for _ in range(R)]
        self.U = [[None] * (L + 1) for _ in range(R)]
        self.Eps = [[None] * (L + 1) for _ in range(R)]
        self.corr = []
        self.pred = []
        self.norms = []
        self.divisors = []
        s = np.zeros((B, E))
        for r in range(R):
            u = np.zeros((B, E))
            u[np.arange(B), heads] = 1.0
            self.U[r][0] = u
            for l in range(1, L + 1):
                Wl = ops.combine(weights[r, l - 1])
                self.W[r][l] = Wl
                self.U[r][l] = self.U[r][l - 1] @ Wl
            eps = np.zeros((Bt, E))
            self.Eps[r][0] = eps
            for l in range(1, L + 1):
                a_q = weights[r, l - 1, self.q_op]
                cur = self.Eps[r][l - 1] @ self.W[r][l]
                cur[rows, t_ent] += a_q * self._injection_base(r, l)
                self.Eps[r][l] = cur
            corr = self.Eps[r][L][rows, t_ent]
            self.corr.append(corr)
            pred = self.U[r][L].copy()
            pred[t_qrow, t_ent] -= corr
            self.pred.append(pred)
            n, d = _norm_divisors(self.U[r][L], normalize)
            self.norms.append(n)
            self.divisors.append(d)
            s += pred / d[:, None]
        self.s = s

    def _injection_base(self, r, l):
        """Mass entering the direct edge at hop l, per (query, target) row."""
        if self.epsilon_mode == CORRECTED:
            return self.U[r][l - 1][self.t_qrow, self.heads[self.t_qrow]]
        if l == 1:
            return np.ones(len(self.t_ent))
        return self.U[r][l - 1][self.t_qrow, self.t_ent]

    def target_matrix(self):
        E = self.ops.num_entities
        v = np.zeros((len(self.heads), E))
        v[self.t_qrow, self.t_ent] = 1.0
        return v

    def uncorrected(self):
        return sum(
            self.U[r][-1] / self.divisors[r][:, None] for r in range(len(self.U))
        )

    def backward(self, ds):
        """dL/d(attention weights) of shape (R, L, K) given dL/ds."""
        ops, weights = self.ops, self.weights
        R, L, K = weights.shape
        rows = np.arange(len(self.t_ent))
        dA = np.zeros((R, L, K))
        for r in range(R):
            d = self.divisors[r]
            dPred = ds / d[:, None]
            dU_l = dPred.copy()
            if self.normalize is not None:
                n = self.norms[r]
                live = n > 0
                dn = -np.einsum("be,be->b", ds, self.pred[r]) / (d * d)
                dn = np.where(live, dn, 0.0)
                if self.normalize == "l2":
                    dU_l += (dn / d)[:, None] * self.U[r][L]
                else:  # l1, states are non-negative
                    dU_l += dn[:, None]
            dCorr = -dPred[self.t_qrow, self.t_ent]
            dEps_l = np.zeros_like(self.Eps[r][L])
            dEps_l[rows, self.t_ent] = dCorr
            for l in range(L, 0, -1):
                a_q = weights[r, l - 1, self.q_op]
                dA[r, l - 1] += _operator_grads(
                    ops, self.U[r][l - 1], dU_l,
                    self.Eps[r][l - 1] if l > 1 else None, dEps_l,
                )
                ge = dEps_l[rows, self.t_ent]
                base = self._injection_base(r, l)
                dA[r, l - 1, self.q_op] += float(np.dot(ge, base))
                Wt = ops.combine_t(weights[r, l - 1])
                dU_prev = dU_l @ Wt
                dEps_prev = dEps_l @ Wt
                if self.epsilon_mode == CORRECTED:
                    np.add.at(
                        dU_prev, (self.t_qrow, self.heads[self.t_qrow]), a_q * ge
                    )
                elif l > 1:
                    np.add.at(dU_prev, (self.t_qrow, self.t_ent), a_q * ge)
                dU_l, dEps_l = dU_prev, dEps_prev
        return dA


def _operator_grads(ops, u_prev, du, eps_prev, deps):
    """d(loss)/d(a_k) for one hop: <u_prev M_k, du> plus the correction stream.

    Both streams propagate through the same weighted operator, so their rows
    are stacked and pushed through each M_k once, via the stored transposed
    CSR matrices (row states become columns) to hit scipy's fast kernel
    without per-call transpose dispatch.
    """
    K = ops.num_predicates + 1
    if eps_prev is not None and len(eps_prev):
        x = np.concatenate([u_prev, eps_prev], axis=0)
        g = np.concatenate([du, deps], axis=0)
    else:
        x, g = u_prev, du
    out = np.empty(K)
    out[IDENTITY_OP] = np.vdot(x, g)
    xt = np.ascontiguousarray(x.T)
    gt = np.ascontiguousarray(g.T)
    for k in range(1, K):
        out[k] = np.vdot(ops.matrices_t[k] @ xt, gt)
    return out


@dataclass
class ScoreResult:
    """Joint prediction for one multi-target query.

    `prediction[t] = uncorrected[t] - per_target_corrections[t]` for every
    target; non-target coordinates carry the plain propagated score.
    """

    prediction: np.ndarray
    per_target_corrections: dict[int, float]
    loss: float
    uncorrected: np.ndarray = field(repr=False, default=None)


def score_query(
    ops: OperatorSet,
    attn: AttentionTensor,
    query: MultiTargetQuery,
    *,
    epsilon_mode: str = CORRECTED,
    normalize: str | None = None,
) -> ScoreResult:
    """Score every entity for one (head, predicate, targets) query.

    Per rank, the head's one-hot state is pushed through the attention-weighted
    operator sum for each hop while one correction stream per target tracks the
    mass that reaches the target through its own direct edge; that mass is
    subtracted from the target's coordinate only, so cross-target paths keep
    their contributions. Ranks are summed.
    """
    fwd = _GroupForward(
        ops,
        attn.weights,
        query.query,
        np.array([query.head]),
        [list(query.targets)],
        epsilon_mode=epsilon_mode,
        normalize=normalize,
    )
    s = fwd.s[0]
    corr_total = np.zeros(len(query.targets))
    for r in range(attn.rank):
        corr_total += fwd.corr[r] / fwd.divisors[r][0]
    corrections = {t: float(c) for t, c in zip(query.targets, corr_total)}
    v = fwd.target_matrix()[0]
    return ScoreResult(
        prediction=s,
        per_target_corrections=corrections,
        loss=logit_loss(s, v),
        uncorrected=fwd.uncorrected()[0],
    )


def score_entities(
    ops: OperatorSet,
    attn: AttentionTensor,
    heads,
    *,
    excluded_edges=None,
    normalize: str | None = None,
) -> np.ndarray:
    """Plain (correction-free) batched scores; one row of entity scores per head.

    `excluded_edges` is an optional (predicate, tails, present) triple: for row
    b the labeled edge (heads[b], predicate, tails[b]) is removed from every
    propagation hop when present[b] is true - the filtered-evaluation protocol.
    """
    heads = np.asarray(heads, dtype=np.int64)
    B = len(heads)
    E = ops.num_entities
    R, L, K = attn.weights.shape
    excl = None
    if excluded_edges is not None:
        pred, tails, present = excluded_edges
        excl = (
            pred + 1,
            np.asarray(tails, dtype=np.int64),
            np.asarray(present, dtype=np.float64),
        )
    s = np.zeros((B, E))
    rows = np.arange(B)
    for r in range(R):
        u = np.zeros((B, E))
        u[rows, heads] = 1.0
        for l in range(L):
            w = attn.weights[r, l]
            nxt = u @ ops.combine(w)
            if excl is not None:
                op, tails, present = excl
                nxt[rows, tails] -= w[op] * present * u[rows, heads]
            u = nxt
        _, d = _norm_divisors(u, normalize)
        s += u / d[:, None]
    return s


def neural_lp_score(ops, attn, head, tail, *, normalize=None) -> float:
    """Reference chain score with no direct-edge correction."""
    return float(score_entities(ops, attn, [head], normalize=normalize)[0, tail])


# ---------------------------------------------------------------------------
# training-facing entry points

def loss_and_gradients(ops: OperatorSet, params: ModelParams, queries):
    """Summed loss and parameter gradients over a batch of queries.

    Queries are grouped by predicate (attention depends only on the predicate)
    and each group runs as one vectorized forward/backward. The returned grads
    are plain sums; callers rescale for mean reduction.
    """
    grads = params.zero_grads()
    total = 0.0
    by_pred: dict[int, list[MultiTargetQuery]] = {}
    for q in queries:
        by_pred.setdefault(q.query, []).append(q)
    for pred, group in by_pred.items():
        weights, att_cache = _attention_forward(params, pred)
        fwd = _GroupForward(
            ops,
            weights,
            pred,
            np.array([g.head for g in group]),
            [list(g.targets) for g in group],
            epsilon_mode=params.epsilon_mode,
            normalize=params.normalize,
        )
        v = fwd.target_matrix()
        total += logit_loss(fwd.s, v)
        ds = logit_loss_grad(fwd.s, v)
        dA = fwd.backward(ds)
        _attention_backward(params, att_cache, dA, grads)
    return total, grads


def backward(ops: OperatorSet, params: ModelParams, query: MultiTargetQuery):
    """Exact gradients of one query's loss w.r.t. every parameter tensor."""
    loss, grads = loss_and_gradients(ops, params, [query])
    return loss, grads


# ---------------------------------------------------------------------------
# rule extraction

@dataclass(frozen=True)
class ExtractedRule:
    hops: RulePattern
    confidence: float
    predicate: int


def extract_rules(
    params: ModelParams,
    query: int,
    top_n: int = 10,
    *,
    enumeration_budget: int = 2_000_000,
) -> list[ExtractedRule]:
    """Rules implied by the trained attention for `query`, ranked by confidence."""
    return rules_from_attention(
        attention_forward(params, query), query, top_n,
        enumeration_budget=enumeration_budget,
    )


def rules_from_attention(
    attn: AttentionTensor,
    query: int,
    top_n: int = 10,
    *,
    enumeration_budget: int = 2_000_000,
) -> list[ExtractedRule]:
    """Rules implied by an attention tensor.

    Every hop sequence over the |P|+1 operators gets confidence
    sum_r prod_l a[r][l][hop]; sequences collapse by dropping identity hops and
    confidences of sequences collapsing to the same rule add up. The empty
    (all-identity) rule is dropped.
    """
    weights = attn.weights
    R, L, K = weights.shape
    if K**L > enumeration_budget:
        raise ValueError(
            f"{K}^{L} hop sequences exceed the enumeration budget "
            f"({enumeration_budget}); a beam-search extraction mode is required "
            "for rule lengths this large"
        )
    conf = np.zeros(K**L)
    for r in range(R):
        v = np.ones(1)
        for l in range(L):
            v = (v[:, None] * weights[r, l][None, :]).ravel()
        conf += v
    merged: dict[tuple[int, ...], float] = {}
    for idx, seq in enumerate(itertools.product(range(K), repeat=L)):
        hops = tuple(k - 1 for k in seq if k != IDENTITY_OP)
        if not hops or conf[idx] == 0.0:
            continue
        merged[hops] = merged.get(hops, 0.0) + conf[idx]
    ranked = sorted(merged.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        ExtractedRule(RulePattern(hops), float(c), query)
        for hops, c in ranked[:top_n]
    ]


def rules_tsv(rules, kg) -> str:
    lines = ["rule\tpredicate\tconfidence"]
    for r in rules:
        lines.append(
            f"{','.join(r.hops.names(kg))}\t{kg.predicates[r.predicate]}\t{r.confidence!r}"
        )
    return "\n".join(lines) + "\n"


def rules_table(rules, kg) -> str:
    if not rules:
        return "(no rules)\n"
    width = max(len(" & ".join(r.hops.names(kg))) for r in rules)
    lines = []
    for r in rules:
        body = " & ".join(r.hops.names(kg))
        lines.append(
            f"{body:<{width}} => {kg.predicates[r.predicate]:<16} {r.confidence:.4f}"
        )
    return "\n".join(lines) + "\n"
