"""Round-limited simultaneous blackboard protocol execution.

Players hold private adjacency lists; the block partitions are public.
In each round every player writes a bit string computed only from its
private input, the public structure, the blackboard content of strictly
earlier rounds and its random streams; a per-player per-round bandwidth
cap is enforced by aborting, never by truncating.  After the last round a
referee - who sees the transcript and public structure but never any
private input - outputs a matching proposal, scored permissively
(illegal pairs count zero).

Messages are uninterpreted '0'/'1' strings; encodings are each protocol's
concern.  Randomness is derived per (run seed, round, player) so messages
are independent of the evaluation order of same-round peers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

from .distribution import ParamsTable, sample_mu
from .graphs import (
    BipartiteGraph,
    Matching,
    MatchScore,
    score_proposal,
    validate_matching,
)
from .matching import max_matching
from .seeding import PathRng, derive_seed


class BandwidthViolation(RuntimeError):
    def __init__(self, player: int, round_index: int, bits: int, cap: int):
        super().__init__(
            f"player {player} wrote {bits} bits in round {round_index}, cap {cap}"
        )
        self.player = player
        self.round_index = round_index
        self.bits = bits
        self.cap = cap


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class PublicInfo:
    """Everything the players and referee share: sizes and block partitions."""

    num_bidders: int
    num_items: int
    bidder_blocks: tuple[int, ...]
    item_blocks: tuple[int, ...]

    @staticmethod
    def of(g: BipartiteGraph) -> "PublicInfo":
        return PublicInfo(g.num_bidders, g.num_items, g.bidder_blocks, g.item_blocks)


@dataclass
class MessageContext:
    """What one player sees when composing one round's message."""

    player: int
    items: tuple[int, ...]  # the player's private demand set
    public: PublicInfo
    board: tuple[tuple[str, ...], ...]  # strictly earlier rounds only
    round_index: int
    seed: int

    @cached_property
    def public_rng(self) -> PathRng:
        # same stream for every player of the round
        return PathRng(self.seed, ("pub", self.round_index))

    @cached_property
    def local_rng(self) -> PathRng:
        return PathRng(self.seed, ("msg", self.round_index, self.player))


@dataclass
class RefereeContext:
    transcript: "Transcript"
    public: PublicInfo
    seed: int

    @cached_property
    def rng(self) -> PathRng:
        return PathRng(self.seed, ("ref",))


MessageFn = Callable[[MessageContext], str]
RefereeFn = Callable[[RefereeContext], Matching]


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    num_rounds: int
    message_fn: MessageFn | None  # None only when num_rounds == 0
    referee_fn: RefereeFn


@dataclass(frozen=True)
class Transcript:
    rounds: tuple[tuple[str, ...], ...]

    def bits_table(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(len(m) for m in rnd) for rnd in self.rounds)

    def total_bits(self) -> int:
        return sum(len(m) for rnd in self.rounds for m in rnd)

    def max_bits(self) -> int:
        return max((len(m) for rnd in self.rounds for m in rnd), default=0)


@dataclass(frozen=True)
class RunStats:
    score: MatchScore
    max_bits_any_player_any_round: int
    total_bits: int
    rounds_used: int
    seed: int


def run_protocol(
    p: ProtocolSpec,
    g: BipartiteGraph,
    bandwidth_cap: int | None = None,
    seed: int = 0,
    player_order: tuple[int, ...] | None = None,
) -> tuple[Transcript, Matching, RunStats]:
    """Execute all rounds and score the referee's proposal against g.

    player_order only changes the evaluation order within a round (used by
    tests to demonstrate simultaneity); it must never change the result.
    """
    public = PublicInfo.of(g)
    order = tuple(range(g.num_bidders)) if player_order is None else player_order
    if sorted(order) != list(range(g.num_bidders)):
        raise ProtocolError("player_order must be a permutation of all players")
    rounds: list[tuple[str, ...]] = []
    for r in range(p.num_rounds):
        board = tuple(rounds)
        msgs: list[str] = [""] * g.num_bidders
        for u in order:
            ctx = MessageContext(
                player=u,
                items=g.adjacency[u],
                public=public,
                board=board,
                round_index=r,
                seed=seed,
            )
            m = p.message_fn(ctx)
            if not isinstance(m, str) or m.strip("01") != "":
                raise ProtocolError(
                    f"player {u} round {r}: message must be a '0'/'1' string"
                )
            if bandwidth_cap is not None and len(m) > bandwidth_cap:
                raise BandwidthViolation(u, r, len(m), bandwidth_cap)
            msgs[u] = m
        rounds.append(tuple(msgs))
    transcript = Transcript(rounds=tuple(rounds))
    proposal = p.referee_fn(RefereeContext(transcript=transcript, public=public, seed=seed))
    rep = validate_matching(proposal)
    if not rep.ok:
        raise ProtocolError(f"referee output invalid: {'; '.join(rep.problems)}")
    score = score_proposal(g, proposal)
    stats = RunStats(
        score=score,
        max_bits_any_player_any_round=transcript.max_bits(),
        total_bits=transcript.total_bits(),
        rounds_used=p.num_rounds,
        seed=seed,
    )
    return transcript, proposal, stats


def derandomized(p: ProtocolSpec, fixed_seed: int) -> ProtocolSpec:
    """Fix all protocol randomness: the returned protocol behaves
    identically under every run seed (the averaging-principle helper)."""

    def msg(ctx: MessageContext) -> str:
        frozen = MessageContext(
            player=ctx.player,
            items=ctx.items,
            public=ctx.public,
            board=ctx.board,
            round_index=ctx.round_index,
            seed=fixed_seed,
        )
        return p.message_fn(frozen)

    def ref(ctx: RefereeContext) -> Matching:
        frozen = RefereeContext(
            transcript=ctx.transcript, public=ctx.public, seed=fixed_seed
        )
        return p.referee_fn(frozen)

    return ProtocolSpec(
        name=f"{p.name}[seed={fixed_seed}]",
        num_rounds=p.num_rounds,
        message_fn=None if p.message_fn is None else msg,
        referee_fn=ref,
    )


# ---------------------------------------------------------------------------
# Monte Carlo evaluation


@dataclass(frozen=True)
class GraphSource:
    """A seeded instance distribution.  perfect_matching declares that every
    draw has maximum matching size equal to its bidder count, letting the
    ratio estimator skip the matching oracle."""

    name: str
    sample: Callable[[int], BipartiteGraph]
    perfect_matching: bool = False


def mu_source(params: ParamsTable) -> GraphSource:
    return GraphSource(
        name=f"mu[{params.mode},n={params.n[-1]},m={params.m[-1]},r={params.rounds}]",
        sample=lambda seed: sample_mu(params, seed).graph,
        perfect_matching=True,
    )


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


def _trial_scores(
    p: ProtocolSpec,
    source: GraphSource,
    trials: int,
    seed: int,
    bandwidth_cap: int | None,
    indices: range | None = None,
) -> list[tuple[int, int]]:
    """(matched, max_matching_size) per trial, in trial order."""
    out = []
    for t in indices if indices is not None else range(trials):
        g = source.sample(derive_seed(seed, "trial", t, "inst"))
        _, _, stats = run_protocol(
            p, g, bandwidth_cap=bandwidth_cap, seed=derive_seed(seed, "trial", t, "run")
        )
        opt = g.num_bidders if source.perfect_matching else len(max_matching(g))
        out.append((stats.score.matched_in_graph, opt))
    return out


def expected_matching_size(
    p: ProtocolSpec,
    source: GraphSource,
    trials: int,
    seed: int,
    bandwidth_cap: int | None = None,
) -> MonteCarloEstimate:
    """Monte Carlo mean of correctly matched pairs over instance draws and
    protocol randomness, with its standard error."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scores = [s for s, _ in _trial_scores(p, source, trials, seed, bandwidth_cap)]
    mean = sum(scores) / trials
    if trials > 1:
        var = sum((s - mean) ** 2 for s in scores) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = 0.0
    return MonteCarloEstimate(mean=mean, stderr=stderr, trials=trials, seed=seed)


def approximation_ratio(
    p: ProtocolSpec,
    source: GraphSource,
    trials: int,
    seed: int,
    bandwidth_cap: int | None = None,
) -> float:
    """E[maximum matching] / E[matched pairs]; infinity when nothing was
    ever matched."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scores = _trial_scores(p, source, trials, seed, bandwidth_cap)
    matched = sum(s for s, _ in scores)
    opt = sum(o for _, o in scores)
    if matched == 0:
        return math.inf
    return opt / matched


# ---------------------------------------------------------------------------
# Transcript files


def _bits_to_hex(bits: str) -> str:
    if not bits:
        return ""
    width = (len(bits) + 3) // 4
    return format(int(bits, 2), f"0{width}x")


def _hex_to_bits(hexstr: str, nbits: int) -> str:
    if nbits == 0:
        return ""
    return format(int(hexstr, 16), f"0{nbits}b")


def transcript_to_json(t: Transcript, public: PublicInfo, stats: RunStats | None = None) -> bytes:
    doc = {
        "version": 1,
        "public": {
            "num_bidders": public.num_bidders,
            "num_items": public.num_items,
            "bidder_blocks": list(public.bidder_blocks),
            "item_blocks": list(public.item_blocks),
        },
        "rounds": [
            [{"bits": len(m), "hex": _bits_to_hex(m)} for m in rnd] for rnd in t.rounds
        ],
        "stats": None
        if stats is None
        else {
            "matched_in_graph": stats.score.matched_in_graph,
            "proposal_size": stats.score.proposal_size,
            "max_bits_any_player_any_round": stats.max_bits_any_player_any_round,
            "total_bits": stats.total_bits,
            "rounds_used": stats.rounds_used,
            "seed": stats.seed,
        },
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


def transcript_from_json(data: bytes) -> tuple[Transcript, PublicInfo]:
    doc = json.loads(data.decode("utf-8"))
    rounds = tuple(
        tuple(_hex_to_bits(m["hex"], m["bits"]) for m in rnd) for rnd in doc["rounds"]
    )
    pub = doc["public"]
    public = PublicInfo(
        num_bidders=int(pub["num_bidders"]),
        num_items=int(pub["num_items"]),
        bidder_blocks=tuple(int(x) for x in pub["bidder_blocks"]),
        item_blocks=tuple(int(x) for x in pub["item_blocks"]),
    )
    return Transcript(rounds=rounds), public
