"""The recursive hard input distribution and its instance bundles.

An instance is built bottom-up from levels.  The base level is a uniform
injection of bidders into items (a random perfect matching; a permutation
when the sides are equal).  A composite level places B bidder blocks
against B + F item blocks: a shared set A of F "fooling" item blocks is
drawn once, each bidder block i is wired to a private "hidden" item block
sigma(i) by an independent copy of the previous level, and every bidder
additionally receives an independent marginal-distributed edge pattern
into each fooling block.  The marginal pattern is drawn with the full
recursive block structure of the previous level, so a single bidder's
edges look identically distributed in its hidden block and in any fooling
block; a "flat" variant that ignores the block structure is kept as a
negative control for exactly that property.

The canonical parameterization ties the sizes to a bandwidth parameter
(B = n^4 and F = ell * n^2 at child size n, base n0 = m0 = ell^5), which
explodes doubly exponentially; the generalized parameterization frees
(B, F) per level so desk-scale instances with the same structure can be
sampled and tested exhaustively.

Hidden generation metadata (A, sigma, the rank J of the hidden block in
the sorted incident set, and the recursion tree) travels in the bundle
and its JSON sidecar but is never exposed to protocols; the public block
partitions live in the graph itself.

Sampling is deterministic: every recursion node draws from a PathRng
keyed by (seed, path of block indices from the root), so any subtree can
be reproduced in isolation.  Within one node the draw order is fixed:
fooling set A, then sigma, then per bidder block / per bidder / per
fooling block (ascending) the fooling patterns.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, replace
from collections.abc import Sequence

from .graphs import (
    BipartiteGraph,
    Matching,
    ValidationReport,
    block_offsets,
)
from .seeding import PathRng

RECURSIVE = "recursive"
FLAT = "flat"


class InvalidParamsError(ValueError):
    pass


class IntractableError(ValueError):
    """Raised instead of attempting a tabulation that cannot fit."""


@dataclass(frozen=True)
class LevelParams:
    """One composite level: B bidder blocks of child-instance size against
    B + F item blocks, F of them fooling."""

    bidder_block_size: int
    item_block_size: int
    num_bidder_blocks: int
    num_fooling_blocks: int


@dataclass(frozen=True)
class ParamsTable:
    mode: str  # "canonical" | "generalized"
    ell: int | None
    base_bidders: int
    base_items: int
    levels: tuple[LevelParams, ...]
    n: tuple[int, ...]  # bidders per level, n[0] = base_bidders
    m: tuple[int, ...]  # items per level
    d: tuple[int, ...]  # bidder degree per level, d[0] = 1

    @property
    def rounds(self) -> int:
        return len(self.levels)


def generalized_params(
    base_bidders: int,
    base_items: int,
    levels: Sequence[tuple[int, int] | LevelParams] = (),
) -> ParamsTable:
    """Free per-level (B, F) sizing over a given base; exact integer
    arithmetic throughout."""
    if base_bidders < 1:
        raise InvalidParamsError("base_bidders must be >= 1")
    if base_items < base_bidders:
        raise InvalidParamsError("base_items must be >= base_bidders")
    n = [base_bidders]
    m = [base_items]
    d = [1]
    lps: list[LevelParams] = []
    for k, lv in enumerate(levels):
        if isinstance(lv, LevelParams):
            if lv.bidder_block_size != n[-1] or lv.item_block_size != m[-1]:
                raise InvalidParamsError(
                    f"level {k + 1}: block sizes {lv.bidder_block_size}x"
                    f"{lv.item_block_size} disagree with derived {n[-1]}x{m[-1]}"
                )
            B, F = lv.num_bidder_blocks, lv.num_fooling_blocks
        else:
            B, F = lv
        if B < 1:
            raise InvalidParamsError(f"level {k + 1}: need at least one bidder block")
        if F < 0:
            raise InvalidParamsError(f"level {k + 1}: negative fooling count")
        lps.append(
            LevelParams(
                bidder_block_size=n[-1],
                item_block_size=m[-1],
                num_bidder_blocks=B,
                num_fooling_blocks=F,
            )
        )
        n.append(B * n[-1])
        m.append((B + F) * m[-1])
        d.append(d[-1] * (F + 1))
    return ParamsTable(
        mode="generalized",
        ell=None,
        base_bidders=base_bidders,
        base_items=base_items,
        levels=tuple(lps),
        n=tuple(n),
        m=tuple(m),
        d=tuple(d),
    )


def canonical_params(ell: int, rounds: int) -> ParamsTable:
    """Canonical sizing: base n0 = m0 = ell^5, then B = n^4 and
    F = ell * n^2 per level.  The derived table is cross-checked against
    the closed form n_k = ell^(5^(k+1)) and the bound m_k <= n_k^2."""
    if ell < 2:
        raise InvalidParamsError("ell must be >= 2")
    if rounds < 0:
        raise InvalidParamsError("rounds must be >= 0")
    base = ell**5
    levels = []
    nk = base
    for _ in range(rounds):
        levels.append((nk**4, ell * nk**2))
        nk = nk**5
    table = replace(generalized_params(base, base, levels), mode="canonical", ell=ell)
    for k in range(rounds + 1):
        closed = ell ** (5 ** (k + 1))
        if table.n[k] != closed:
            raise InvalidParamsError(
                f"recurrence n_{k} = {table.n[k]} disagrees with closed form {closed}"
            )
        if table.m[k] > table.n[k] ** 2:
            raise InvalidParamsError(f"m_{k} exceeds n_{k}^2")
    return table


def params_to_dict(p: ParamsTable) -> dict:
    if p.mode == "canonical":
        return {"mode": "canonical", "ell": p.ell, "rounds": p.rounds}
    return {
        "mode": "generalized",
        "base_bidders": p.base_bidders,
        "base_items": p.base_items,
        "levels": [[lv.num_bidder_blocks, lv.num_fooling_blocks] for lv in p.levels],
    }


def params_from_dict(doc: dict) -> ParamsTable:
    try:
        if doc["mode"] == "canonical":
            return canonical_params(int(doc["ell"]), int(doc["rounds"]))
        if doc["mode"] == "generalized":
            return generalized_params(
                int(doc["base_bidders"]),
                int(doc["base_items"]),
                [(int(b), int(f)) for b, f in doc.get("levels", [])],
            )
    except KeyError as e:
        raise InvalidParamsError(f"missing field {e}") from e
    raise InvalidParamsError(f"unknown mode {doc.get('mode')!r}")


@dataclass(frozen=True)
class LevelMeta:
    """Hidden structure of one composite level.

    fooling_set is the shared sorted set A; sigma[i] is the item block
    carrying bidder block i's hidden copy; tau_rank[i] is the 1-based rank
    of sigma[i] within the sorted incident set {sigma[i]} | A; children[i]
    is the metadata of the hidden copy (None when the child is a base
    instance)."""

    level: int
    fooling_set: tuple[int, ...]
    sigma: tuple[int, ...]
    tau_rank: tuple[int, ...]
    children: tuple[LevelMeta | None, ...]

    def incident_blocks(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.fooling_set + (self.sigma[i],)))


@dataclass(frozen=True)
class InstanceBundle:
    graph: BipartiteGraph
    params: ParamsTable
    meta: LevelMeta | None
    certificate: Matching
    fooling_mode: str = RECURSIVE


def _marginal_pattern(rng: PathRng, params: ParamsTable, level: int, mode: str) -> list[int]:
    # sorted item indices within one level-`level` item block
    if level == 0:
        return [rng.randrange(params.m[0])]
    if mode == FLAT:
        return sorted(rng.sample(params.m[level], params.d[level]))
    lp = params.levels[level - 1]
    blocks = lp.num_bidder_blocks + lp.num_fooling_blocks
    m_child = params.m[level - 1]
    out: list[int] = []
    for s in sorted(rng.sample(blocks, lp.num_fooling_blocks + 1)):
        off = s * m_child
        out.extend(off + v for v in _marginal_pattern(rng, params, level - 1, mode))
    return out


def sample_bidder_marginal(
    level: int, params: ParamsTable, seed: int, fooling_mode: str = RECURSIVE
) -> tuple[int, ...]:
    """One draw of the single-bidder marginal at the given level: the edge
    pattern of one bidder within one level-`level` item block."""
    if not 0 <= level <= params.rounds:
        raise InvalidParamsError(f"level {level} outside 0..{params.rounds}")
    return tuple(_marginal_pattern(PathRng(seed, ()), params, level, fooling_mode))


def _build(params: ParamsTable, level: int, seed: int, path: tuple, mode: str):
    # returns (adjacency rows, certificate item per bidder, meta)
    if level == 0:
        rng = PathRng(seed, path)
        image = rng.sample(params.m[0], params.n[0])
        return [(v,) for v in image], image, None
    lp = params.levels[level - 1]
    B, F = lp.num_bidder_blocks, lp.num_fooling_blocks
    n_child, m_child = params.n[level - 1], params.m[level - 1]
    rng = PathRng(seed, path)
    fooling = sorted(rng.sample(B + F, F))
    in_fooling = frozenset(fooling)
    complement = [x for x in range(B + F) if x not in in_fooling]
    sigma = [complement[j] for j in rng.sample(B, B)]
    patterns = [
        [[_marginal_pattern(rng, params, level - 1, mode) for _ in fooling]
         for _ in range(n_child)]
        for _ in range(B)
    ]
    adjacency: list[tuple[int, ...]] = []
    certificate: list[int] = []
    children = []
    for i in range(B):
        child_adj, child_cert, child_meta = _build(params, level - 1, seed, path + (i,), mode)
        children.append(child_meta)
        hid_off = sigma[i] * m_child
        for u_loc in range(n_child):
            edges = [hid_off + v for v in child_adj[u_loc]]
            for a_idx, a in enumerate(fooling):
                off = a * m_child
                edges.extend(off + v for v in patterns[i][u_loc][a_idx])
            edges.sort()
            adjacency.append(tuple(edges))
        certificate.extend(hid_off + v for v in child_cert)
    meta = LevelMeta(
        level=level,
        fooling_set=tuple(fooling),
        sigma=tuple(sigma),
        tau_rank=tuple(bisect_left(fooling, s) + 1 for s in sigma),
        children=tuple(children),
    )
    return adjacency, certificate, meta


def sample_mu(params: ParamsTable, seed: int, fooling_mode: str = RECURSIVE) -> InstanceBundle:
    """Sample one instance with its hidden metadata and matching certificate."""
    if fooling_mode not in (RECURSIVE, FLAT):
        raise ValueError(f"unknown fooling_mode {fooling_mode!r}")
    r = params.rounds
    adjacency, cert_items, meta = _build(params, r, seed, (), fooling_mode)
    if r == 0:
        bidder_blocks = (params.n[0],)
        item_blocks = (params.m[0],)
    else:
        lp = params.levels[-1]
        bidder_blocks = (params.n[r - 1],) * lp.num_bidder_blocks
        item_blocks = (params.m[r - 1],) * (lp.num_bidder_blocks + lp.num_fooling_blocks)
    graph = BipartiteGraph(
        num_bidders=params.n[r],
        num_items=params.m[r],
        adjacency=tuple(adjacency),
        bidder_blocks=bidder_blocks,
        item_blocks=item_blocks,
    )
    certificate = Matching(pairs=tuple(enumerate(cert_items)))
    return InstanceBundle(
        graph=graph,
        params=params,
        meta=meta,
        certificate=certificate,
        fooling_mode=fooling_mode,
    )


def sample_mu0(m0: int, seed: int) -> InstanceBundle:
    """Base case alone: a uniformly random permutation matching on m0 pairs."""
    return sample_mu(generalized_params(m0, m0, []), seed)


def _verify_level(
    g: BipartiteGraph,
    params: ParamsTable,
    level: int,
    meta: LevelMeta | None,
    bidders: range,
    item_lo: int,
    problems: list[str],
    where: str,
) -> None:
    if level == 0:
        if meta is not None:
            problems.append(f"{where}: base level carries composite metadata")
        for u in bidders:
            if len(g.adjacency[u]) != 1:
                problems.append(f"{where}: bidder {u} degree {len(g.adjacency[u])} != 1")
        return
    lp = params.levels[level - 1]
    B, F = lp.num_bidder_blocks, lp.num_fooling_blocks
    n_child, m_child = params.n[level - 1], params.m[level - 1]
    d_child = params.d[level - 1]
    if meta is None:
        problems.append(f"{where}: missing metadata at level {level}")
        return
    if len(meta.fooling_set) != F:
        problems.append(f"{where}: |A| = {len(meta.fooling_set)} != F = {F}")
    if sorted(set(meta.fooling_set)) != list(meta.fooling_set):
        problems.append(f"{where}: fooling set not sorted/distinct")
    if len(meta.sigma) != B or len(set(meta.sigma)) != B:
        problems.append(f"{where}: sigma not an injection on {B} blocks")
    fool = set(meta.fooling_set)
    for i, s in enumerate(meta.sigma):
        if not 0 <= s < B + F:
            problems.append(f"{where}: sigma({i}) = {s} out of range")
        if s in fool:
            problems.append(f"{where}: sigma({i}) = {s} lands in the fooling set")
    if len(meta.children) != B:
        problems.append(f"{where}: {len(meta.children)} children for {B} blocks")
        return
    for i in range(B):
        incident = meta.incident_blocks(i)
        if len(incident) != F + 1:
            problems.append(f"{where}: block {i} incident set size {len(incident)}")
        expected_rank = bisect_left(incident, meta.sigma[i]) + 1
        if meta.tau_rank[i] != expected_rank:
            problems.append(
                f"{where}: block {i} J = {meta.tau_rank[i]}, expected {expected_rank}"
            )
        incident_set = set(incident)
        block_bidders = range(
            bidders.start + i * n_child, bidders.start + (i + 1) * n_child
        )
        for u in block_bidders:
            per_block: dict[int, int] = {}
            for v in g.adjacency[u]:
                rel = v - item_lo
                if not 0 <= rel < (B + F) * m_child:
                    problems.append(f"{where}: bidder {u} edge {v} outside its level")
                    continue
                per_block[rel // m_child] = per_block.get(rel // m_child, 0) + 1
            if set(per_block) != incident_set:
                problems.append(
                    f"{where}: bidder {u} touches blocks {sorted(per_block)}, "
                    f"expected {sorted(incident_set)}"
                )
            elif any(c != d_child for c in per_block.values()):
                problems.append(f"{where}: bidder {u} per-block degree != {d_child}")
        # recurse into the hidden copy, rebased to local indices
        hid_lo = item_lo + meta.sigma[i] * m_child
        sub_adj = []
        for u in block_bidders:
            sub_adj.append(
                tuple(v - hid_lo for v in g.adjacency[u] if hid_lo <= v < hid_lo + m_child)
            )
        sub = BipartiteGraph(
            num_bidders=n_child,
            num_items=m_child,
            adjacency=tuple(sub_adj),
            bidder_blocks=(n_child,),
            item_blocks=(m_child,),
        )
        _verify_level(
            sub,
            params,
            level - 1,
            meta.children[i],
            range(n_child),
            0,
            problems,
            f"{where}/{i}",
        )


def verify_bundle(b: InstanceBundle) -> ValidationReport:
    """Structural validation: certificate perfection, degree regularity,
    block bookkeeping and metadata consistency, recursively."""
    problems: list[str] = []
    g, params = b.graph, b.params
    r = params.rounds
    if g.num_bidders != params.n[r] or g.num_items != params.m[r]:
        problems.append(
            f"graph is {g.num_bidders}x{g.num_items}, params say {params.n[r]}x{params.m[r]}"
        )
        return ValidationReport(ok=False, problems=tuple(problems))
    if r == 0:
        want_b, want_i = (params.n[0],), (params.m[0],)
    else:
        lp = params.levels[-1]
        want_b = (params.n[r - 1],) * lp.num_bidder_blocks
        want_i = (params.m[r - 1],) * (lp.num_bidder_blocks + lp.num_fooling_blocks)
    if g.bidder_blocks != want_b:
        problems.append("bidder blocks disagree with params")
    if g.item_blocks != want_i:
        problems.append("item blocks disagree with params")

    covered = set()
    items_used = set()
    for u, v in b.certificate.pairs:
        if u in covered:
            problems.append(f"certificate repeats bidder {u}")
        covered.add(u)
        if v in items_used:
            problems.append(f"certificate repeats item {v}")
        items_used.add(v)
        if not g.has_edge(u, v):
            problems.append(f"certificate pair ({u}, {v}) is not an edge")
    if covered != set(range(g.num_bidders)):
        problems.append(
            f"certificate not covering: {len(covered)} of {g.num_bidders} bidders"
        )

    d_top = params.d[r]
    for u in range(g.num_bidders):
        if g.degree(u) != d_top:
            problems.append(f"degree irregular: bidder {u} has {g.degree(u)} != {d_top}")

    _verify_level(g, params, r, b.meta, range(g.num_bidders), 0, problems, "root")
    return ValidationReport(ok=not problems, problems=tuple(problems))


def instance_size_estimate(params: ParamsTable) -> int:
    """Bytes of the binary instance encoding, computable without sampling."""
    r = params.rounds
    if r == 0:
        blocks = 2
    else:
        lp = params.levels[-1]
        blocks = 2 * lp.num_bidder_blocks + lp.num_fooling_blocks
    words = 3 + 2 + blocks + params.n[r] + params.n[r] * params.d[r]
    return 8 * words


def _meta_to_dict(meta: LevelMeta | None) -> dict | None:
    if meta is None:
        return None
    return {
        "level": meta.level,
        "fooling_set": list(meta.fooling_set),
        "sigma": list(meta.sigma),
        "J": list(meta.tau_rank),
        "children": [_meta_to_dict(c) for c in meta.children],
    }


def _meta_from_dict(doc: dict | None) -> LevelMeta | None:
    if doc is None:
        return None
    return LevelMeta(
        level=int(doc["level"]),
        fooling_set=tuple(int(x) for x in doc["fooling_set"]),
        sigma=tuple(int(x) for x in doc["sigma"]),
        tau_rank=tuple(int(x) for x in doc["J"]),
        children=tuple(_meta_from_dict(c) for c in doc["children"]),
    )


def bundle_sidecar_json(b: InstanceBundle) -> bytes:
    """Hidden-metadata sidecar; the instance file itself is the graph."""
    root = _meta_to_dict(b.meta)
    doc = {
        "params": params_to_dict(b.params),
        "fooling_mode": b.fooling_mode,
        "fooling_set": None if root is None else root["fooling_set"],
        "sigma": None if root is None else root["sigma"],
        "J": None if root is None else root["J"],
        "children": [] if root is None else root["children"],
        "certificate": [list(pair) for pair in b.certificate.pairs],
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


def bundle_from_sidecar(graph: BipartiteGraph, sidecar: bytes) -> InstanceBundle:
    doc = json.loads(sidecar.decode("utf-8"))
    params = params_from_dict(doc["params"])
    if doc["sigma"] is None:
        meta = None
    else:
        meta = _meta_from_dict(
            {
                "level": params.rounds,
                "fooling_set": doc["fooling_set"],
                "sigma": doc["sigma"],
                "J": doc["J"],
                "children": doc["children"],
            }
        )
    certificate = Matching(pairs=tuple((int(u), int(v)) for u, v in doc["certificate"]))
    return InstanceBundle(
        graph=graph,
        params=params,
        meta=meta,
        certificate=certificate,
        fooling_mode=doc.get("fooling_mode", RECURSIVE),
    )
