"""Shared fixtures: the six-entity worked example, random graphs, brute-force
oracles, and a synthetic multi-family kinship dataset generator."""

import itertools
import os
import random
from pathlib import Path

import numpy as np
import pytest

from mplr.kg import KnowledgeGraph, load_dataset

# ---------------------------------------------------------------------------
# six-entity toy graph reproducing the worked adjacency/product matrices

TOY_ENTITIES = ["x1", "x2", "z1", "z2", "z3", "z4"]
TOY_PREDICATES = ["daughterOf", "sisterOf", "auntOf"]
TOY_TRIPLES = [
    ("z1", "daughterOf", "x1"),
    ("z2", "daughterOf", "x1"),
    ("z4", "daughterOf", "x2"),
    ("z1", "sisterOf", "z2"),
    ("z1", "sisterOf", "z4"),
    ("z2", "sisterOf", "z1"),
    ("z2", "sisterOf", "z4"),
    ("z4", "sisterOf", "z1"),
    ("z4", "sisterOf", "z4"),
    ("x2", "auntOf", "z2"),
    ("x2", "auntOf", "z3"),
]

TOY_LINES = [f"{h}\t{p}\t{t}" for h, p, t in TOY_TRIPLES]


def build_toy_kg():
    ents = {e: i for i, e in enumerate(TOY_ENTITIES)}
    preds = {p: i for i, p in enumerate(TOY_PREDICATES)}
    triples = [(ents[h], preds[p], ents[t]) for h, p, t in TOY_TRIPLES]
    return KnowledgeGraph(TOY_ENTITIES, TOY_PREDICATES, triples)


@pytest.fixture
def toy_kg():
    return build_toy_kg()


@pytest.fixture
def toy_dataset_dir(tmp_path):
    """Toy triples as an on-disk dataset (all triples in train, empty valid/test)."""
    d = tmp_path / "toy"
    d.mkdir()
    (d / "train.txt").write_text("".join(line + "\n" for line in TOY_LINES))
    (d / "valid.txt").write_text("")
    (d / "test.txt").write_text("")
    return d


# ---------------------------------------------------------------------------
# random graphs

def random_kg(seed, num_entities=8, num_predicates=4, edge_prob=0.18):
    """Seeded random multigraph over anonymous entities, no duplicate triples."""
    rng = np.random.default_rng(seed)
    triples = []
    for p in range(num_predicates):
        mask = rng.random((num_entities, num_entities)) < edge_prob
        for h, t in zip(*np.nonzero(mask)):
            triples.append((int(h), p, int(t)))
    if not triples:
        triples = [(0, 0, min(1, num_entities - 1))]
    entities = [f"e{i}" for i in range(num_entities)]
    predicates = [f"p{i}" for i in range(num_predicates)]
    return KnowledgeGraph(entities, predicates, triples)


# ---------------------------------------------------------------------------
# brute-force oracles (kept independent of the library's propagation code)

def dfs_count_paths(kg, head, hops, tail, excluded_edge=None):
    """Exhaustive path enumeration; hops are predicate indices, -1 = stay put."""

    def rec(node, i):
        if i == len(hops):
            return 1 if node == tail else 0
        p = hops[i]
        if p == -1:
            return rec(node, i + 1)
        total = 0
        for nxt in kg.successors(p, node):
            if excluded_edge is not None and (node, p, nxt) == tuple(excluded_edge):
                continue
            total += rec(nxt, i + 1)
        return total

    return rec(head, 0)


def oracle_scores(kg, weights, query):
    """Exhaustive weighted-path score with direct-edge multiplicity accounting.

    For every operator sequence (identity = stay) and every concrete entity
    path, the path's weight is the product of per-hop attention entries; a
    path ending at a target t is additionally weighted by (1 - u) where u is
    the number of times it traversed the direct edge (head, q, t).
    """
    R, L, K = weights.shape
    E = kg.num_entities
    targets = set(query.targets)
    s = np.zeros(E)
    for r in range(R):
        for seq in itertools.product(range(K), repeat=L):
            w = 1.0
            for l in range(L):
                w *= weights[r, l, seq[l]]
            if w == 0.0:
                continue

            def walk(node, i, direct_uses):
                if i == L:
                    end = node
                    if end in targets:
                        s[end] += w * (1 - direct_uses.get(end, 0))
                    else:
                        s[end] += w
                    return
                k = seq[i]
                if k == 0:
                    walk(node, i + 1, direct_uses)
                    return
                p = k - 1
                for nxt in kg.successors(p, node):
                    du = direct_uses
                    if p == query.query and node == query.head:
                        du = dict(direct_uses)
                        du[nxt] = du.get(nxt, 0) + 1
                    walk(nxt, i + 1, du)

            walk(query.head, 0, {})
    return s


def naive_bernoulli_loss(s, v):
    """Direct -sum v log sigma(s) + (1-v) log sigma(-s); fine for |s| <= 20."""
    s = np.asarray(s, dtype=np.float64)

    def sig(x):
        return 1.0 / (1.0 + np.exp(-x))

    return float(-np.sum(v * np.log(sig(s)) + (1 - v) * np.log(sig(-s))))


# ---------------------------------------------------------------------------
# synthetic multi-family kinship data

KIN_PREDICATES = [
    "brotherOf", "sisterOf", "fatherOf", "motherOf", "husbandOf", "wifeOf",
    "sonOf", "daughterOf", "uncleOf", "auntOf", "nephewOf", "nieceOf",
]


def make_family_triples(num_clans=3, seed=0):
    """Two-generation family trees with the twelve kinship relations closed
    over each tree (blood uncles/aunts only)."""
    rng = random.Random(seed)
    triples = set()

    def marry(m, f):
        triples.add((m, "husbandOf", f))
        triples.add((f, "wifeOf", m))

    def child_of(kid, gender, father, mother):
        triples.add((father, "fatherOf", kid))
        triples.add((mother, "motherOf", kid))
        rel = "sonOf" if gender == "m" else "daughterOf"
        triples.add((kid, rel, father))
        triples.add((kid, rel, mother))

    def siblings(kids):
        for (a, ga), (b, _) in itertools.permutations(kids, 2):
            triples.add((a, "brotherOf" if ga == "m" else "sisterOf", b))

    for c in range(num_clans):
        fresh = itertools.count()

        def person(gender):
            return f"c{c}_{gender}{next(fresh)}"

        gpa, gma = person("m"), person("f")
        marry(gpa, gma)
        parents = []
        for _ in range(rng.randint(2, 3)):
            g = rng.choice("mf")
            kid = person(g)
            child_of(kid, g, gpa, gma)
            parents.append((kid, g))
        siblings(parents)
        for kid, g in parents:
            spouse = person("f" if g == "m" else "m")
            if g == "m":
                marry(kid, spouse)
                father, mother = kid, spouse
            else:
                marry(spouse, kid)
                father, mother = spouse, kid
            grandkids = []
            for _ in range(rng.randint(1, 3)):
                gg = rng.choice("mf")
                gk = person(gg)
                child_of(gk, gg, father, mother)
                grandkids.append((gk, gg))
            siblings(grandkids)
            for u, ug in parents:
                if u == kid:
                    continue
                for gk, gg in grandkids:
                    triples.add((u, "uncleOf" if ug == "m" else "auntOf", gk))
                    triples.add((gk, "nephewOf" if gg == "m" else "nieceOf", u))
    return sorted(triples)


def write_family_dataset(root, num_clans=3, seed=0, fractions=(0.84, 0.08, 0.08)):
    triples = make_family_triples(num_clans, seed)
    rng = random.Random(seed + 1)
    rng.shuffle(triples)
    n = len(triples)
    n_train = int(fractions[0] * n)
    n_valid = int(fractions[1] * n)
    parts = {
        "train.txt": triples[:n_train],
        "valid.txt": triples[n_train : n_train + n_valid],
        "test.txt": triples[n_train + n_valid :],
    }
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for name, rows in parts.items():
        (root / name).write_text(
            "".join(f"{h}\t{r}\t{t}\n" for h, r, t in rows)
        )
    return root


@pytest.fixture(scope="session")
def family_dataset_dir(tmp_path_factory):
    return write_family_dataset(tmp_path_factory.mktemp("kin") / "families")


@pytest.fixture(scope="session")
def family_data(family_dataset_dir):
    d = family_dataset_dir
    return load_dataset(d / "train.txt", d / "valid.txt", d / "test.txt")


# ---------------------------------------------------------------------------
# benchmark dataset discovery (used by the acceptance suite)

def benchmark_dir(name):
    """Path to a real benchmark dataset if present, else None.

    Looks under $MPLR_DATA_DIR (default ./data) for <name>/{train,valid,test}.txt.
    """
    root = Path(os.environ.get("MPLR_DATA_DIR", "data"))
    d = root / name
    if all((d / f).is_file() for f in ("train.txt", "valid.txt", "test.txt")):
        return d
    return None


def require_benchmark(name):
    d = benchmark_dir(name)
    if d is None:
        pytest.skip(
            f"benchmark dataset {name!r} not available: place train.txt/valid.txt/"
            f"test.txt under $MPLR_DATA_DIR/{name} (default ./data/{name}); "
            "this sandbox has no network access to fetch it"
        )
    return d
