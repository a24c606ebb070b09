"""Monte Carlo estimators for what first-round messages reveal.

Both estimators sample full instances from the real sampler (never a
shortcut that bakes in the property under test), tabulate plug-in
frequencies and report transparent support-size bias bounds.  Estimates
are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .distribution import IntractableError, ParamsTable, sample_mu
from .graphs import BipartiteGraph
from .protocol import MessageContext, ProtocolSpec, PublicInfo
from .seeding import derive_seed


@dataclass(frozen=True)
class BidderView:
    """One bidder's eye view for a simultaneous first round: private demand
    set plus public structure.  hidden_rank is populated only by the
    negative-control hook; honest estimation never fills it."""

    player: int
    items: tuple[int, ...]
    public: PublicInfo
    hidden_rank: int | None = None


FirstRoundFn = Callable[[BidderView], str]


def first_round_fn(spec: ProtocolSpec, run_seed: int = 0) -> FirstRoundFn:
    """Adapt a protocol's round-0 message function to the lab interface."""
    if spec.message_fn is None:
        raise ValueError(f"protocol {spec.name} has no message rounds")

    def fn(view: BidderView) -> str:
        ctx = MessageContext(
            player=view.player,
            items=view.items,
            public=view.public,
            board=(),
            round_index=0,
            seed=run_seed,
        )
        return spec.message_fn(ctx)

    return fn


def _check_message(m: str) -> str:
    if not isinstance(m, str) or m.strip("01") != "":
        raise ValueError("first-round message must be a '0'/'1' string")
    return m


def _plugin_cmi_nats(counts: dict[tuple, int], total: int) -> float:
    """Plug-in I(M;J|I) from (message, rank, incident-set) frequencies."""
    p_i: dict = {}
    p_mi: dict = {}
    p_ji: dict = {}
    for (m, j, i), c in counts.items():
        p_i[i] = p_i.get(i, 0) + c
        p_mi[(m, i)] = p_mi.get((m, i), 0) + c
        p_ji[(j, i)] = p_ji.get((j, i), 0) + c
    nats = 0.0
    for (m, j, i), c in counts.items():
        nats += c * math.log(c * p_i[i] / (p_mi[(m, i)] * p_ji[(j, i)]))
    return max(nats / total, 0.0)


@dataclass(frozen=True)
class IndexLeakageReport:
    estimate_nats: float
    bias_bound_nats: float  # (|support| - 1) / (2 * samples)
    samples: int
    message_alphabet: int
    rank_alphabet: int
    incident_alphabet: int
    tolerance: float
    passed: bool


def estimate_index_leakage(
    params: ParamsTable,
    message_fn: FirstRoundFn,
    num_samples: int,
    seed: int = 0,
    bidder: int = 0,
    expose_hidden_rank: bool = False,
    tolerance: float = 0.0,
    max_cells: int = 200_000,
) -> IndexLeakageReport:
    """Estimate how much one bidder's first-round message says about which
    incident item block is the hidden one, I(message; rank | incident set).

    Plug-in estimate over sampled instances, passing when it stays within
    tolerance of the support-size bias bound.  expose_hidden_rank feeds the
    true rank to the message function, a deliberate cheat for negative
    controls."""
    if params.rounds < 1:
        raise ValueError("index leakage needs at least one composite level")
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    n_child = params.n[params.rounds - 1]
    block = bidder // n_child
    counts: dict[tuple, int] = {}
    for t in range(num_samples):
        b = sample_mu(params, derive_seed(seed, "trial", t))
        meta = b.meta
        rank = meta.tau_rank[block]
        incident = meta.incident_blocks(block)
        view = BidderView(
            player=bidder,
            items=b.graph.adjacency[bidder],
            public=PublicInfo.of(b.graph),
            hidden_rank=rank if expose_hidden_rank else None,
        )
        key = (_check_message(message_fn(view)), rank, incident)
        counts[key] = counts.get(key, 0) + 1
        if len(counts) > max_cells:
            raise IntractableError(
                f"joint table exceeded {max_cells} cells; message too long to tabulate"
            )
    msgs = {m for m, _, _ in counts}
    ranks = {j for _, j, _ in counts}
    incidents = {i for _, _, i in counts}
    support = len(msgs) * len(ranks) * len(incidents)
    bias = (support - 1) / (2 * num_samples)
    est = _plugin_cmi_nats(counts, num_samples)
    return IndexLeakageReport(
        estimate_nats=est,
        bias_bound_nats=bias,
        samples=num_samples,
        message_alphabet=len(msgs),
        rank_alphabet=len(ranks),
        incident_alphabet=len(incidents),
        tolerance=tolerance,
        passed=est <= bias + tolerance,
    )


@dataclass(frozen=True)
class PsiDistanceReport:
    estimate: float  # E over (message, incident set, rank) of |psi - mu_child|
    envelope: float  # displayed analogue sqrt(n_child * bits / F); not a theorem
    samples: int
    buckets: int
    child_support: int
    max_message_bits: int


def _hidden_child_key(
    g: BipartiteGraph, bidders: range, item_lo: int, item_hi: int
) -> tuple[int, ...]:
    out = []
    for u in bidders:
        for v in g.adjacency[u]:
            if item_lo <= v < item_hi:
                out.append(v - item_lo)
    return tuple(out)


def estimate_psi_distance(
    params: ParamsTable,
    message_fn: FirstRoundFn,
    num_samples: int,
    seed: int = 0,
    block: int = 0,
    max_child_support: int = 200,
    max_buckets: int = 500_000,
) -> PsiDistanceReport:
    """Average statistical distance between the hidden copy's conditional
    distribution given (block first-round message, incident set, rank) and
    its unconditional distribution.

    Tabulation needs the hidden copy to be a base-level instance with a
    small injection space; larger children are refused."""
    if params.rounds != 1:
        raise IntractableError(
            "hidden-copy distribution is only tabulable when the hidden copy "
            "is a base-level instance (one composite level)"
        )
    n0, m0 = params.n[0], params.m[0]
    child_support = math.perm(m0, n0)
    if child_support > max_child_support:
        raise IntractableError(
            f"child instance space has {child_support} outcomes, cap {max_child_support}"
        )
    bidders = range(block * n0, (block + 1) * n0)
    buckets: dict[tuple, dict[tuple, int]] = {}
    max_bits = 0
    for t in range(num_samples):
        b = sample_mu(params, derive_seed(seed, "trial", t))
        meta = b.meta
        public = PublicInfo.of(b.graph)
        msgs = []
        for u in bidders:
            m = _check_message(
                message_fn(BidderView(player=u, items=b.graph.adjacency[u], public=public))
            )
            max_bits = max(max_bits, len(m))
            msgs.append(m)
        lo = meta.sigma[block] * m0
        child = _hidden_child_key(b.graph, bidders, lo, lo + m0)
        key = (tuple(msgs), meta.incident_blocks(block), meta.tau_rank[block])
        cell = buckets.setdefault(key, {})
        cell[child] = cell.get(child, 0) + 1
        if len(buckets) > max_buckets:
            raise IntractableError(f"bucket count exceeded {max_buckets}")
    uniform = 1.0 / child_support
    total = 0.0
    for cell in buckets.values():
        n_b = sum(cell.values())
        dist = sum(abs(c / n_b - uniform) for c in cell.values())
        dist += (child_support - len(cell)) * uniform
        total += (n_b / num_samples) * 0.5 * dist
    lp = params.levels[-1]
    if lp.num_fooling_blocks > 0 and max_bits > 0:
        envelope = math.sqrt(n0 * max_bits / lp.num_fooling_blocks)
    elif max_bits == 0:
        envelope = 0.0
    else:
        envelope = math.inf
    return PsiDistanceReport(
        estimate=total,
        envelope=envelope,
        samples=num_samples,
        buckets=len(buckets),
        child_support=child_support,
        max_message_bits=max_bits,
    )
