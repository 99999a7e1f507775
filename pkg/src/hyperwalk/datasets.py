"""Dataset ingestion and preparation.

Citation networks (content + cites files) become hypergraphs with one
hyperedge per paper: the paper plus its 1-neighborhood (or, optionally, only
the papers it cites). Set-membership datasets arrive as JSON lines and can be
augmented with synthesized negative hyperedges. Also provides seeded split
generation and planted synthetic datasets for calibration and tests.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from hyperwalk.hypergraph import Hypergraph, build

log = logging.getLogger("hyperwalk.datasets")


@dataclass
class CitationDataset:
    paper_ids: list
    features: np.ndarray           # (n_papers, feature_dim)
    labels: np.ndarray             # (n_papers,) int codes
    label_names: list
    citations: np.ndarray          # (n_citations, 2) dense indices, (citing, cited)
    skipped_citations: int = 0

    @property
    def n_papers(self) -> int:
        return len(self.paper_ids)


@dataclass
class SetDataset:
    record_ids: list
    members: list                  # list of sorted int arrays (dense vertex ids)
    labels: np.ndarray             # (n_records,) int codes
    label_names: list
    vertex_names: list

    @property
    def n_records(self) -> int:
        return len(self.record_ids)

    def cardinalities(self) -> np.ndarray:
        return np.array([len(m) for m in self.members])


@dataclass(frozen=True)
class LabeledSplit:
    train_ids: np.ndarray
    val_ids: np.ndarray
    test_ids: np.ndarray
    fractions: tuple
    seed: int


def _encode_labels(raw_labels):
    names = sorted(set(raw_labels))
    index = {name: i for i, name in enumerate(names)}
    return np.array([index[x] for x in raw_labels], dtype=np.int64), names


def ingest_citation(content_path, cites_path, expected_feature_dim: int | None = None) -> CitationDataset:
    """Parse content (`id f1..fk label`) and cites (`citing cited`) files.

    Paper ids are re-indexed densely in file order. Citations referencing
    unknown ids are skipped and counted; malformed lines raise with their
    line number.
    """
    paper_ids, rows, raw_labels = [], [], []
    width = None
    with open(content_path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if width is None:
                width = len(parts)
                if width < 3:
                    raise ValueError(f"{content_path}:{lineno}: expected id, features, label")
            if len(parts) != width:
                raise ValueError(f"{content_path}:{lineno}: expected {width} fields, got {len(parts)}")
            paper_ids.append(parts[0])
            try:
                rows.append([float(x) for x in parts[1:-1]])
            except ValueError as exc:
                raise ValueError(f"{content_path}:{lineno}: non-numeric feature") from exc
            raw_labels.append(parts[-1])
    if not paper_ids:
        raise ValueError(f"{content_path}: empty content file")
    features = np.asarray(rows)
    if expected_feature_dim is not None and features.shape[1] != expected_feature_dim:
        raise ValueError(f"{content_path}: feature width {features.shape[1]}, expected {expected_feature_dim}")
    labels, label_names = _encode_labels(raw_labels)

    index = {pid: i for i, pid in enumerate(paper_ids)}
    pairs, skipped = [], 0
    with open(cites_path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{cites_path}:{lineno}: expected two ids, got {len(parts)}")
            a, b = parts
            if a not in index or b not in index:
                skipped += 1
                continue
            pairs.append((index[a], index[b]))
    if skipped:
        log.warning("%s: skipped %d citations referencing unknown papers", cites_path, skipped)
    citations = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return CitationDataset(paper_ids, features, labels, label_names, citations, skipped)


def ingest_pubmed(node_path, cites_path) -> CitationDataset:
    """Adapter for the native PubMed tab files.

    Node file: two header lines (the second declares `numeric:w-...`
    attributes), then `pmid<TAB>label=k<TAB>w-term=value...<TAB>summary=...`.
    Cites file: two header lines, then `id<TAB>paper:a<TAB>|<TAB>paper:b`,
    read as a citing b.
    """
    with open(node_path) as f:
        f.readline()
        schema = f.readline().split()
        terms = [field.split(":")[1] for field in schema if field.startswith("numeric:")]
        term_index = {t: i for i, t in enumerate(terms)}
        if not terms:
            raise ValueError(f"{node_path}: no numeric attributes declared in header")
        paper_ids, raw_labels, rows = [], [], []
        for lineno, line in enumerate(f, start=3):
            parts = line.rstrip("\n").split("\t")
            if not parts or parts == [""]:
                continue
            pid = parts[0]
            label = None
            vec = np.zeros(len(terms))
            for field in parts[1:]:
                if field.startswith("label="):
                    label = field[len("label="):]
                elif field.startswith("summary="):
                    continue
                elif "=" in field:
                    term, value = field.split("=", 1)
                    if term in term_index:
                        vec[term_index[term]] = float(value)
            if label is None:
                raise ValueError(f"{node_path}:{lineno}: row without label")
            paper_ids.append(pid)
            raw_labels.append(label)
            rows.append(vec)
    if not paper_ids:
        raise ValueError(f"{node_path}: empty node file")
    labels, label_names = _encode_labels(raw_labels)
    features = np.asarray(rows)

    index = {pid: i for i, pid in enumerate(paper_ids)}
    pairs, skipped = [], 0
    with open(cites_path) as f:
        f.readline()
        f.readline()
        for lineno, line in enumerate(f, start=3):
            parts = line.split()
            if not parts:
                continue
            refs = [p.split(":", 1)[1] for p in parts if p.startswith("paper:")]
            if len(refs) != 2:
                raise ValueError(f"{cites_path}:{lineno}: expected two paper refs")
            if refs[0] not in index or refs[1] not in index:
                skipped += 1
                continue
            pairs.append((index[refs[0]], index[refs[1]]))
    if skipped:
        log.warning("%s: skipped %d citations referencing unknown papers", cites_path, skipped)
    citations = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return CitationDataset(paper_ids, features, labels, label_names, citations, skipped)


def subsample_citation(d: CitationDataset, fraction: float, seed: int) -> CitationDataset:
    """Seeded vertex subsample; keeps citations with both endpoints retained."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    rng = np.random.default_rng(seed)
    n_keep = max(2, int(round(fraction * d.n_papers)))
    keep = np.sort(rng.choice(d.n_papers, size=n_keep, replace=False))
    remap = -np.ones(d.n_papers, dtype=np.int64)
    remap[keep] = np.arange(n_keep)
    mask = (remap[d.citations[:, 0]] >= 0) & (remap[d.citations[:, 1]] >= 0)
    citations = remap[d.citations[mask]]
    labels = d.labels[keep]
    names_used = sorted({d.label_names[i] for i in labels})
    relabel = {d.label_names.index(n): i for i, n in enumerate(names_used)}
    return CitationDataset(
        paper_ids=[d.paper_ids[i] for i in keep],
        features=d.features[keep],
        labels=np.array([relabel[i] for i in labels], dtype=np.int64),
        label_names=names_used,
        citations=citations,
        skipped_citations=d.skipped_citations,
    )


def neighborhood_hypergraph(d: CitationDataset, mode: str = "neighborhood"):
    """One hyperedge per paper; returns (hypergraph, centroid map).

    ``neighborhood``: the paper plus every paper it cites or is cited by,
    direction ignored. ``cited``: the paper plus only the papers it cites.
    The paper-to-hyperedge mapping is the identity, returned explicitly as
    the centroid map.
    """
    if mode not in ("neighborhood", "cited"):
        raise ValueError(f"unknown hyperedge mode {mode!r}")
    neighbors = [[i] for i in range(d.n_papers)]
    for a, b in d.citations:
        neighbors[a].append(int(b))
        if mode == "neighborhood":
            neighbors[b].append(int(a))
    h = build(neighbors, n_vertices=d.n_papers)
    return h, np.arange(d.n_papers, dtype=np.int64)


def ingest_set_jsonl(path, seed: int = 0) -> SetDataset:
    """JSON lines: {"id": ..., "members": [...], "label": "x" | ["x", ...]}.

    Multi-label records get one label drawn uniformly (seeded). Member names
    map to dense vertex ids in sorted order.
    """
    rng = np.random.default_rng(seed)
    record_ids, member_names, raw_labels = [], [], []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON") from exc
            if not rec.get("members"):
                raise ValueError(f"{path}:{lineno}: record has no members")
            label = rec["label"]
            if isinstance(label, list):
                if not label:
                    raise ValueError(f"{path}:{lineno}: empty label list")
                label = label[int(rng.integers(len(label)))]
            record_ids.append(str(rec["id"]))
            member_names.append([str(m) for m in rec["members"]])
            raw_labels.append(str(label))
    if not record_ids:
        raise ValueError(f"{path}: no records")
    vertex_names = sorted({m for ms in member_names for m in ms})
    vindex = {name: i for i, name in enumerate(vertex_names)}
    members = [np.unique([vindex[m] for m in ms]).astype(np.int64) for ms in member_names]
    labels, label_names = _encode_labels(raw_labels)
    return SetDataset(record_ids, members, labels, label_names, vertex_names)


def write_set_jsonl(d: SetDataset, path) -> None:
    with open(path, "w") as f:
        for i in range(d.n_records):
            rec = {
                "id": d.record_ids[i],
                "members": [d.vertex_names[v] for v in d.members[i]],
                "label": d.label_names[d.labels[i]],
            }
            f.write(json.dumps(rec, sort_keys=True))
            f.write("\n")


def relabel_classes(d: SetDataset, mapping: dict, default: str | None = None) -> SetDataset:
    """Class-grouping relabel; unmapped labels keep their name unless a default is given."""
    raw = [mapping.get(d.label_names[c], default if default is not None else d.label_names[c])
           for c in d.labels]
    labels, label_names = _encode_labels(raw)
    return SetDataset(list(d.record_ids), list(d.members), labels, label_names, list(d.vertex_names))


NEGATIVE_SCHEMES = ("uniform_cardinality", "empirical_cardinality")


def synthesize_negatives(d: SetDataset, scheme: str, ratio: float = 1.0, seed: int = 0,
                         negative_label: str = "negative") -> SetDataset:
    """Append random negative hyperedges under a distinct negative class.

    Cardinality n per negative: `uniform_cardinality` draws n uniformly
    between the smallest and largest positive cardinality; `empirical_cardinality`
    draws n from the positive cardinality distribution itself. Members are
    sampled uniformly without replacement from the vertex universe; an exact
    duplicate of an existing positive set is resampled.
    """
    if scheme not in NEGATIVE_SCHEMES:
        raise ValueError(f"unknown negative scheme {scheme!r}")
    if d.n_records == 0:
        raise ValueError("dataset has no positive records")
    if negative_label in d.label_names:
        raise ValueError(f"label {negative_label!r} already present")
    rng = np.random.default_rng(seed)
    universe = len(d.vertex_names)
    cards = d.cardinalities()
    lo, hi = int(cards.min()), int(cards.max())
    if hi > universe:
        raise ValueError(f"largest requested cardinality {hi} exceeds universe size {universe}")
    n_new = int(round(ratio * d.n_records))
    existing = {frozenset(m.tolist()) for m in d.members}

    new_members = []
    for i in range(n_new):
        for _ in range(1000):
            n = int(rng.integers(lo, hi + 1)) if scheme == "uniform_cardinality" \
                else int(cards[rng.integers(len(cards))])
            picked = np.sort(rng.choice(universe, size=n, replace=False))
            if frozenset(picked.tolist()) not in existing:
                break
        else:
            raise ValueError("could not synthesize a fresh negative; universe too constrained")
        new_members.append(picked.astype(np.int64))

    label_names = list(d.label_names) + [negative_label]
    neg_code = len(label_names) - 1
    labels = np.concatenate([d.labels, np.full(n_new, neg_code, dtype=np.int64)])
    record_ids = list(d.record_ids) + [f"neg{i}" for i in range(n_new)]
    return SetDataset(record_ids, list(d.members) + new_members, labels, label_names, list(d.vertex_names))


def set_to_hypergraph(d: SetDataset) -> Hypergraph:
    return build(d.members, n_vertices=len(d.vertex_names))


def split(ids, labels, fractions, seed: int) -> LabeledSplit:
    """Uniform seeded partition (no stratification) with largest-remainder rounding.

    Two fractions mean (train, test); three mean (train, validation, test).
    """
    fractions = tuple(float(x) for x in fractions)
    if len(fractions) not in (2, 3):
        raise ValueError("fractions must have 2 or 3 entries")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    ids = np.asarray(ids)
    n = len(ids)
    exact = np.array(fractions) * n
    sizes = np.floor(exact).astype(int)
    remainder = exact - sizes
    for i in np.argsort(-remainder)[: n - sizes.sum()]:
        sizes[i] += 1
    if sizes[0] == 0:
        raise ValueError("train split is empty")
    perm = ids[np.random.default_rng(seed).permutation(n)]
    bounds = np.cumsum(sizes)
    train_ids = perm[: bounds[0]]
    if len(fractions) == 2:
        val_ids, test_ids = perm[:0], perm[bounds[0]:]
    else:
        val_ids, test_ids = perm[bounds[0]:bounds[1]], perm[bounds[1]:]
    if labels is not None:
        labels = np.asarray(labels)
        id_list = ids.tolist()
        train_classes = {int(labels[id_list.index(i)]) for i in train_ids.tolist()}
        missing = set(np.unique(labels).tolist()) - train_classes
        if missing:
            log.warning("classes %s have no training instances", sorted(missing))
    return LabeledSplit(train_ids, val_ids, test_ids, fractions, seed)


def write_labels(path, label_names_per_id) -> None:
    """Labels file: `hyperedge_id<TAB>label` per line."""
    with open(path, "w") as f:
        for i, name in enumerate(label_names_per_id):
            f.write(f"{i}\t{name}\n")


def read_labels(path):
    """Returns (label codes, label names) from a labels file."""
    raw = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected id<TAB>label")
            raw[int(parts[0])] = parts[1]
    if sorted(raw) != list(range(len(raw))):
        raise ValueError(f"{path}: hyperedge ids are not dense")
    names = [raw[i] for i in range(len(raw))]
    codes, label_names = _encode_labels(names)
    return codes, label_names


def make_planted_set_dataset(n_vertices: int = 300, n_communities: int = 6,
                             n_records: int = 400, seed: int = 0,
                             card_small=(3, 6), card_tail=(7, 30),
                             tail_fraction: float = 0.15,
                             within_fraction: float = 0.9,
                             community_size: int | None = None) -> SetDataset:
    """Synthetic positives: vertex communities emitting mostly-coherent subsets.

    Cardinalities are skewed (mostly small with a long tail) so that
    uniform-cardinality negatives are separable by size alone while
    empirical-cardinality negatives are not. With the default
    community_size=None the communities partition the vertices into disjoint
    blocks; an explicit community_size draws each community as a random subset
    of that size, so a vertex can belong to several communities at once.
    """
    rng = np.random.default_rng(seed)
    if community_size is None:
        if n_vertices % n_communities:
            raise ValueError("n_vertices must be divisible by n_communities")
        comm_size = n_vertices // n_communities
        communities = [np.arange(c * comm_size, (c + 1) * comm_size)
                       for c in range(n_communities)]
    else:
        if community_size > n_vertices:
            raise ValueError("community_size exceeds the vertex universe")
        comm_size = community_size
        communities = [np.sort(rng.choice(n_vertices, size=comm_size, replace=False))
                       for _ in range(n_communities)]
    if comm_size < card_tail[1]:
        raise ValueError("communities smaller than the largest cardinality")
    record_ids, members, raw_labels = [], [], []
    for i in range(n_records):
        c = int(rng.integers(n_communities))
        lo_c, hi_c = card_tail if rng.random() < tail_fraction else card_small
        n = int(rng.integers(lo_c, hi_c + 1))
        n_in = max(1, int(round(within_fraction * n)))
        inside = rng.choice(communities[c], size=n_in, replace=False)
        n_out = n - n_in
        if n_out:
            rest = np.setdiff1d(np.arange(n_vertices), communities[c])
            outside = rng.choice(rest, size=n_out, replace=False)
            picked = np.concatenate([inside, outside])
        else:
            picked = inside
        record_ids.append(f"set{i}")
        members.append(np.unique(picked).astype(np.int64))
        raw_labels.append("complex")
    labels, label_names = _encode_labels(raw_labels)
    vertex_names = [str(v) for v in range(n_vertices)]
    return SetDataset(record_ids, members, labels, label_names, vertex_names)


def make_planted_family_dataset(n_vertices: int = 240, n_families: int = 150,
                                n_records: int = 600, seed: int = 0,
                                core_small=(4, 4), core_tail=(10, 36),
                                tail_fraction: float = 0.08,
                                keep_fraction: float = 0.9,
                                outsider_fraction: float = 0.3) -> SetDataset:
    """Synthetic positives: recurring noisy variants of planted vertex cores.

    Each family owns a core of vertices; cores are drawn from the
    least-covered vertices first so coverage stays balanced (per-vertex core
    counts differ by at most one and no vertex is left to appear only in
    synthesized negatives). Every record subsamples one core, keeping
    keep_fraction of it (at least 2 vertices), and with probability
    outsider_fraction tacks on a single vertex from outside the core. Records
    from the same family are therefore near-duplicate siblings, which gives
    membership sets internal structure beyond their size. All records carry
    one positive label; pair with synthesize_negatives for a two-class task.
    """
    rng = np.random.default_rng(seed)
    for lo, hi in (core_small, core_tail):
        if not 2 <= lo <= hi:
            raise ValueError("core size bounds must satisfy 2 <= lo <= hi")
    if core_tail[1] >= n_vertices:
        raise ValueError("core size exceeds the vertex universe")
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError("keep_fraction must be in (0, 1]")
    sizes = []
    for _ in range(n_families):
        lo, hi = core_tail if rng.random() < tail_fraction else core_small
        sizes.append(int(rng.integers(lo, hi + 1)))
    counts = np.zeros(n_vertices)
    cores = []
    for s in sizes:
        order = np.lexsort((rng.random(n_vertices), counts))
        core = order[:s]
        counts[core] += 1
        cores.append(np.sort(core))
    record_ids, members, raw_labels = [], [], []
    for i in range(n_records):
        f = int(rng.integers(n_families))
        core = cores[f]
        n_in = max(2, int(round(keep_fraction * len(core))))
        picked = rng.choice(core, size=n_in, replace=False)
        if rng.random() < outsider_fraction:
            rest = np.setdiff1d(np.arange(n_vertices), core)
            picked = np.append(picked, rng.choice(rest))
        record_ids.append(f"set{i}")
        members.append(np.unique(picked).astype(np.int64))
        raw_labels.append("complex")
    labels, label_names = _encode_labels(raw_labels)
    vertex_names = [str(v) for v in range(n_vertices)]
    return SetDataset(record_ids, members, labels, label_names, vertex_names)


def make_planted_citation_dataset(n_papers: int = 600, n_classes: int = 4,
                                  feature_dim: int = 64, mean_degree: float = 4.0,
                                  intra_fraction: float = 0.9, feature_noise: float = 0.05,
                                  seed: int = 0) -> CitationDataset:
    """Synthetic citation network with class-assortative links and class-coded
    sparse binary features; used for end-to-end smoke tests and calibration."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, size=n_papers)
    by_class = [np.flatnonzero(labels == c) for c in range(n_classes)]
    pairs = set()
    for i in range(n_papers):
        for _ in range(rng.poisson(mean_degree)):
            pool = by_class[labels[i]] if rng.random() < intra_fraction else np.arange(n_papers)
            j = int(pool[rng.integers(len(pool))])
            if j != i:
                pairs.add((i, j))
    block = feature_dim // n_classes
    features = (rng.random((n_papers, feature_dim)) < feature_noise).astype(float)
    for i in range(n_papers):
        lo = labels[i] * block
        features[i, lo:lo + block] = (rng.random(block) < 0.4).astype(float)
    return CitationDataset(
        paper_ids=[f"p{i}" for i in range(n_papers)],
        features=features,
        labels=labels.astype(np.int64),
        label_names=[f"class{c}" for c in range(n_classes)],
        citations=np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2),
    )
