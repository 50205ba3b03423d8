"""Knowledge graph loading, vocabularies, degree statistics, and query grouping.

Triple files are UTF-8 text, one triple per line, three TAB-separated fields:
head, relation, tail. Entity and predicate identifiers are opaque strings;
integer indices are assigned by first appearance so repeated loads of the same
files are reproducible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

Triple = tuple[int, int, int]

DEFAULT_GRAPH_SOURCE = ("train", "valid", "test")
INVERSE_PREFIX = "inv:"


class TripleParseError(ValueError):
    """A triple file line does not have exactly three TAB-separated fields."""


class KnowledgeGraph:
    """Immutable triple store with per-predicate subgraph views.

    `triples` holds deduplicated (head, predicate, tail) index triples;
    `per_predicate[p]` is the edge list of the subgraph of predicate p.
    """

    def __init__(self, entities, predicates, triples):
        self.entities = list(entities)
        self.predicates = list(predicates)
        self.entity_index = {e: i for i, e in enumerate(self.entities)}
        self.predicate_index = {p: i for i, p in enumerate(self.predicates)}
        if len(self.entity_index) != len(self.entities):
            raise ValueError("duplicate entity identifiers")
        if len(self.predicate_index) != len(self.predicates):
            raise ValueError("duplicate predicate identifiers")

        ne, np_ = len(self.entities), len(self.predicates)
        seen = set()
        self.triples: list[Triple] = []
        self.per_predicate: dict[int, list[tuple[int, int]]] = {
            p: [] for p in range(np_)
        }
        # forward/backward adjacency per predicate: vertex -> neighbor list
        self._out: dict[int, dict[int, list[int]]] = {p: {} for p in range(np_)}
        self._in: dict[int, dict[int, list[int]]] = {p: {} for p in range(np_)}
        for h, p, t in triples:
            if not (0 <= h < ne and 0 <= t < ne):
                raise ValueError(f"entity index out of range in triple {(h, p, t)}")
            if not 0 <= p < np_:
                raise ValueError(f"predicate index out of range in triple {(h, p, t)}")
            if (h, p, t) in seen:
                raise ValueError(f"duplicate triple {(h, p, t)}")
            seen.add((h, p, t))
            self.triples.append((h, p, t))
            self.per_predicate[p].append((h, t))
            self._out[p].setdefault(h, []).append(t)
            self._in[p].setdefault(t, []).append(h)
        self._triple_set = seen

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_predicates(self) -> int:
        return len(self.predicates)

    def num_edges(self, predicate: int) -> int:
        """Edge count of the predicate subgraph (n^q)."""
        return len(self.per_predicate[predicate])

    def has_triple(self, h: int, p: int, t: int) -> bool:
        return (h, p, t) in self._triple_set

    def heads(self, predicate: int):
        """Distinct head entities of the predicate subgraph, first-appearance order."""
        return list(self._out[predicate])

    def tails(self, predicate: int):
        return list(self._in[predicate])

    def successors(self, predicate: int, v: int):
        return self._out[predicate].get(v, [])

    def predecessors(self, predicate: int, v: int):
        return self._in[predicate].get(v, [])

    def to_lines(self):
        """Render triples back to the TAB-separated text format."""
        for h, p, t in self.triples:
            yield f"{self.entities[h]}\t{self.predicates[p]}\t{self.entities[t]}"


def fw_degree(kg: KnowledgeGraph, predicate: int, v: int) -> int:
    """Number of entities reached from v by `predicate` edges (out-degree in G(q))."""
    if not 0 <= v < kg.num_entities:
        raise IndexError(f"entity index {v} out of range")
    return len(kg._out[predicate].get(v, ()))


def bw_degree(kg: KnowledgeGraph, predicate: int, v: int) -> int:
    """Number of entities reaching v by `predicate` edges (in-degree in G(q))."""
    if not 0 <= v < kg.num_entities:
        raise IndexError(f"entity index {v} out of range")
    return len(kg._in[predicate].get(v, ()))


@dataclass
class DatasetSplits:
    """Index triples of the three dataset files plus which of them feed the graph."""

    train: list[Triple]
    valid: list[Triple]
    test: list[Triple]
    graph_source: tuple[str, ...] = DEFAULT_GRAPH_SOURCE

    def split(self, name: str) -> list[Triple]:
        return {"train": self.train, "valid": self.valid, "test": self.test}[name]


@dataclass
class LoadSummary:
    num_entities: int
    num_predicates: int
    num_graph_triples: int
    split_sizes: dict[str, int] = field(default_factory=dict)
    duplicates: dict[str, int] = field(default_factory=dict)
    graph_source: tuple[str, ...] = DEFAULT_GRAPH_SOURCE

    def as_text(self) -> str:
        lines = [
            f"entities = {self.num_entities}",
            f"predicates = {self.num_predicates}",
            f"graph_triples = {self.num_graph_triples}",
            f"graph_source = {','.join(self.graph_source)}",
        ]
        for name in ("train", "valid", "test"):
            lines.append(f"{name}_triples = {self.split_sizes.get(name, 0)}")
            lines.append(f"{name}_duplicates = {self.duplicates.get(name, 0)}")
        return "\n".join(lines) + "\n"


def parse_triple_file(path) -> list[tuple[str, str, str]]:
    """Read one TAB-separated triple file; raises TripleParseError with the line number."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or any(not f.strip() for f in parts):
                raise TripleParseError(
                    f"{path}:{lineno}: expected 3 TAB-separated fields, got {len(parts)}"
                )
            out.append((parts[0].strip(), parts[1].strip(), parts[2].strip()))
    return out


def load_dataset(
    train_path,
    valid_path,
    test_path,
    graph_source: tuple[str, ...] = DEFAULT_GRAPH_SOURCE,
    add_inverse: bool = False,
):
    """Load the three split files into a KnowledgeGraph plus DatasetSplits.

    Vocabularies cover the union of all splits in first-appearance order
    (train, then valid, then test; head, relation, tail within a line). The
    reasoning graph is built from the splits named by `graph_source`. Duplicate
    lines within a split are stored once and counted in the summary; a triple
    appearing in two different splits is an error. `add_inverse` adds an
    `inv:<name>` predicate and reversed edge to the graph (not to the splits)
    for every loaded triple; it defaults off so queries stay (h, q, ?)-only.

    Returns (kg, splits, summary).
    """
    for name in graph_source:
        if name not in ("train", "valid", "test"):
            raise ValueError(f"unknown graph source {name!r}")
    raw = {
        "train": parse_triple_file(train_path),
        "valid": parse_triple_file(valid_path),
        "test": parse_triple_file(test_path),
    }
    if not raw["train"]:
        raise ValueError(f"empty train file: {train_path}")

    entities: list[str] = []
    predicates: list[str] = []
    ent_idx: dict[str, int] = {}
    pred_idx: dict[str, int] = {}

    def ent(name):
        if name not in ent_idx:
            ent_idx[name] = len(entities)
            entities.append(name)
        return ent_idx[name]

    def pred(name):
        if name not in pred_idx:
            pred_idx[name] = len(predicates)
            predicates.append(name)
        return pred_idx[name]

    splits_idx: dict[str, list[Triple]] = {}
    duplicates: dict[str, int] = {}
    for name in ("train", "valid", "test"):
        seen: set[Triple] = set()
        dedup: list[Triple] = []
        for h, r, t in raw[name]:
            tri = (ent(h), pred(r), ent(t))
            if tri in seen:
                continue
            seen.add(tri)
            dedup.append(tri)
        splits_idx[name] = dedup
        duplicates[name] = len(raw[name]) - len(dedup)

    for a, b in (("train", "valid"), ("train", "test"), ("valid", "test")):
        overlap = set(splits_idx[a]) & set(splits_idx[b])
        if overlap:
            raise ValueError(
                f"splits {a} and {b} share {len(overlap)} triples; "
                "splits must be pairwise disjoint"
            )

    graph_triples: list[Triple] = []
    for name in ("train", "valid", "test"):
        if name in graph_source:
            graph_triples.extend(splits_idx[name])

    if add_inverse:
        base = list(graph_triples)
        inv_ids = {}
        for p, pname in enumerate(list(predicates)):
            inv_ids[p] = pred(INVERSE_PREFIX + pname)
        graph_triples.extend((t, inv_ids[p], h) for h, p, t in base)

    kg = KnowledgeGraph(entities, predicates, graph_triples)
    splits = DatasetSplits(
        splits_idx["train"], splits_idx["valid"], splits_idx["test"], tuple(graph_source)
    )
    summary = LoadSummary(
        num_entities=kg.num_entities,
        num_predicates=kg.num_predicates,
        num_graph_triples=len(kg.triples),
        split_sizes={k: len(v) for k, v in splits_idx.items()},
        duplicates=duplicates,
        graph_source=tuple(graph_source),
    )
    return kg, splits, summary


def write_triples(kg: KnowledgeGraph, path) -> None:
    Path(path).write_text(
        "".join(line + "\n" for line in kg.to_lines()), encoding="utf-8"
    )


@dataclass(frozen=True)
class MultiTargetQuery:
    """One (head, query predicate) pair together with every tail answering it."""

    head: int
    query: int
    targets: tuple[int, ...]

    def __post_init__(self):
        if not self.targets:
            raise ValueError("query must have at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate targets in query")


def group_queries(split: list[Triple]) -> list[MultiTargetQuery]:
    """Group a triple list into one query per distinct (head, predicate) pair.

    Output order and target order are first-appearance, so grouping is
    deterministic for a fixed split.
    """
    targets: dict[tuple[int, int], list[int]] = {}
    for h, q, t in split:
        ts = targets.setdefault((h, q), [])
        if t not in ts:
            ts.append(t)
    return [
        MultiTargetQuery(h, q, tuple(ts)) for (h, q), ts in targets.items()
    ]
