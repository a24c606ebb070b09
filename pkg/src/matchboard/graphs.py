"""Bipartite graphs, matchings, proposal scoring and instance files.

The shared vocabulary of every other module.  Bidders and items are dense
0-indexed integers; the public block partitions are contiguous index
ranges given by their sizes.  Adjacency is stored bidder-side as strictly
increasing tuples; item-side lists are derived on demand.

Instance file formats
---------------------
JSON (version 1)::

    {"version": 1, "num_bidders": N, "num_items": M,
     "bidder_blocks": [sizes...], "item_blocks": [sizes...],
     "adjacency": [[item, ...], ...]}

Binary container: the same fields in the same order, every value a
little-endian unsigned 64-bit integer, every list preceded by its length.
Adjacency is written as one length-prefixed list per bidder.  The two
formats are losslessly inter-convertible.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

FORMAT_VERSION = 1


class ParseError(ValueError):
    """Malformed instance stream; `offset` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class MalformedProposalError(ValueError):
    """A referee proposal violating matching distinctness."""


@dataclass(frozen=True)
class BipartiteGraph:
    num_bidders: int
    num_items: int
    adjacency: tuple[tuple[int, ...], ...]
    bidder_blocks: tuple[int, ...]
    item_blocks: tuple[int, ...]

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def has_edge(self, u: int, v: int) -> bool:
        if not 0 <= u < self.num_bidders:
            return False
        adj = self.adjacency[u]
        i = bisect_left(adj, v)
        return i < len(adj) and adj[i] == v

    def item_adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Per-item sorted bidder lists, derived from the bidder-side store."""
        items: list[list[int]] = [[] for _ in range(self.num_items)]
        for u, adj in enumerate(self.adjacency):
            for v in adj:
                items[v].append(u)
        return tuple(tuple(b) for b in items)

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency)


@dataclass(frozen=True)
class Matching:
    """A set of (bidder, item) pairs with distinct endpoints on both sides.

    Pairs need not be edges of any particular graph: a Matching doubles as
    a referee proposal, and proposals may contain illegal pairs.
    """

    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class MatchScore:
    matched_in_graph: int
    proposal_size: int
    max_matching_size: int | None = None
    ratio: Fraction | None = None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...]


def block_offsets(sizes: tuple[int, ...]) -> tuple[int, ...]:
    """Start offset of each block plus the final end offset."""
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)
    return tuple(offs)


def block_of(offsets: tuple[int, ...], index: int) -> int:
    """Block number containing `index`, given block_offsets output."""
    return bisect_left(offsets, index + 1) - 1


def validate_graph(g: BipartiteGraph) -> ValidationReport:
    problems: list[str] = []
    if g.num_bidders < 0 or g.num_items < 0:
        problems.append("negative vertex count")
    if len(g.adjacency) != g.num_bidders:
        problems.append(
            f"adjacency has {len(g.adjacency)} rows for {g.num_bidders} bidders"
        )
    for u, adj in enumerate(g.adjacency):
        prev = -1
        for v in adj:
            if not 0 <= v < g.num_items:
                problems.append(f"bidder {u}: item index {v} out of range")
            if v <= prev:
                problems.append(f"bidder {u}: adjacency not strictly increasing at {v}")
            prev = v
    for name, sizes, total in (
        ("bidder_blocks", g.bidder_blocks, g.num_bidders),
        ("item_blocks", g.item_blocks, g.num_items),
    ):
        if any(s < 0 for s in sizes):
            problems.append(f"{name}: negative block size")
        if sum(sizes) != total:
            problems.append(f"{name}: sizes sum to {sum(sizes)}, expected {total}")
    return ValidationReport(ok=not problems, problems=tuple(problems))


def validate_matching(p: Matching) -> ValidationReport:
    problems = []
    bidders = [u for u, _ in p.pairs]
    items = [v for _, v in p.pairs]
    if len(set(bidders)) != len(bidders):
        problems.append("duplicate bidder in matching")
    if len(set(items)) != len(items):
        problems.append("duplicate item in matching")
    return ValidationReport(ok=not problems, problems=tuple(problems))


def score_proposal(g: BipartiteGraph, p: Matching) -> MatchScore:
    """Count proposal pairs that are actual edges; illegal pairs score zero.

    Raises MalformedProposalError if the proposal repeats a bidder or an
    item (malformed referee output, distinct from merely illegal pairs).
    """
    report = validate_matching(p)
    if not report.ok:
        raise MalformedProposalError("; ".join(report.problems))
    matched = sum(1 for u, v in p.pairs if g.has_edge(u, v))
    return MatchScore(matched_in_graph=matched, proposal_size=len(p.pairs))


def graph_to_json(g: BipartiteGraph) -> bytes:
    doc = {
        "version": FORMAT_VERSION,
        "num_bidders": g.num_bidders,
        "num_items": g.num_items,
        "bidder_blocks": list(g.bidder_blocks),
        "item_blocks": list(g.item_blocks),
        "adjacency": [list(a) for a in g.adjacency],
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


def graph_from_json(data: bytes) -> BipartiteGraph:
    try:
        doc = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ParseError("not valid UTF-8", e.start) from e
    except json.JSONDecodeError as e:
        raise ParseError(f"bad JSON: {e.msg}", e.pos) from e
    try:
        if doc["version"] != FORMAT_VERSION:
            raise ParseError(f"unsupported version {doc['version']}", 0)
        g = BipartiteGraph(
            num_bidders=int(doc["num_bidders"]),
            num_items=int(doc["num_items"]),
            adjacency=tuple(tuple(int(v) for v in row) for row in doc["adjacency"]),
            bidder_blocks=tuple(int(s) for s in doc["bidder_blocks"]),
            item_blocks=tuple(int(s) for s in doc["item_blocks"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"bad instance document: {e}", 0) from e
    return g


def graph_to_binary(g: BipartiteGraph) -> bytes:
    words = [FORMAT_VERSION, g.num_bidders, g.num_items]
    words.append(len(g.bidder_blocks))
    words.extend(g.bidder_blocks)
    words.append(len(g.item_blocks))
    words.extend(g.item_blocks)
    for adj in g.adjacency:
        words.append(len(adj))
        words.extend(adj)
    out = bytearray()
    for w in words:
        out += w.to_bytes(8, "little")
    return bytes(out)


class _WordReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def word(self, what: str) -> int:
        if self.pos + 8 > len(self.data):
            raise ParseError(f"truncated while reading {what}", self.pos)
        v = int.from_bytes(self.data[self.pos : self.pos + 8], "little")
        self.pos += 8
        return v

    def words(self, count: int, what: str) -> tuple[int, ...]:
        return tuple(self.word(what) for _ in range(count))


def graph_from_binary(data: bytes) -> BipartiteGraph:
    r = _WordReader(data)
    version = r.word("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version}", 0)
    num_bidders = r.word("num_bidders")
    num_items = r.word("num_items")
    bidder_blocks = r.words(r.word("bidder_blocks length"), "bidder_blocks")
    item_blocks = r.words(r.word("item_blocks length"), "item_blocks")
    adjacency = []
    for u in range(num_bidders):
        deg = r.word(f"degree of bidder {u}")
        adjacency.append(r.words(deg, f"adjacency of bidder {u}"))
    if r.pos != len(data):
        raise ParseError("trailing bytes after instance", r.pos)
    return BipartiteGraph(
        num_bidders=num_bidders,
        num_items=num_items,
        adjacency=tuple(adjacency),
        bidder_blocks=bidder_blocks,
        item_blocks=item_blocks,
    )
