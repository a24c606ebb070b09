"""Concrete protocols tracing the rounds/approximation tradeoff.

All message encodings are fixed-width: an item index costs
ceil(log2(num_items)) bits, activity flags one bit, so bandwidth
accounting is exact.  Tie-breaking is lowest-index everywhere unless a
protocol exposes a seeded variant.  Referees reconstruct all derived
state (awards, prices, holders) from the transcript alone.

Protocol ids for the CLI: ``zero_round[:strategy=identity|random]``,
``one_shot:k=K``, ``iterated:r=R[,tie=lowest|random]``,
``auction[:cap=C,inc=I]``.
"""

from __future__ import annotations

from .graphs import Matching
from .protocol import (
    MessageContext,
    ProtocolSpec,
    PublicInfo,
    RefereeContext,
    Transcript,
)


def _item_bits(num_items: int) -> int:
    return max(1, (num_items - 1).bit_length())


def _encode_item(v: int, width: int) -> str:
    return format(v, f"0{width}b")


def zero_round_referee(strategy: str = "identity") -> ProtocolSpec:
    """No communication at all: the referee proposes a full matching from
    public structure alone, either bidder i -> item i or a seeded uniform
    permutation of the items."""
    if strategy not in ("identity", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")

    def referee(ctx: RefereeContext) -> Matching:
        k = min(ctx.public.num_bidders, ctx.public.num_items)
        if strategy == "identity":
            return Matching(pairs=tuple((i, i) for i in range(k)))
        perm = ctx.rng.sample(ctx.public.num_items, k)
        return Matching(pairs=tuple((i, perm[i]) for i in range(k)))

    return ProtocolSpec(
        name=f"zero_round:{strategy}", num_rounds=0, message_fn=None, referee_fn=referee
    )


def one_shot_announce(k: int) -> ProtocolSpec:
    """One simultaneous round: each player announces its min(k, degree)
    lowest-index demanded items in k fixed slots of ceil(log2 m) bits
    (short lists pad by repeating the last item; players with no demand
    write zero-filled slots).  The referee greedily matches the announced
    edge set."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def message(ctx: MessageContext) -> str:
        width = _item_bits(ctx.public.num_items)
        announce = list(ctx.items[:k])
        if announce:
            announce += [announce[-1]] * (k - len(announce))
        else:
            announce = [0] * k
        return "".join(_encode_item(v, width) for v in announce)

    def referee(ctx: RefereeContext) -> Matching:
        width = _item_bits(ctx.public.num_items)
        taken: set[int] = set()
        pairs = []
        for u, msg in enumerate(ctx.transcript.rounds[0]):
            slots = {int(msg[j * width : (j + 1) * width], 2) for j in range(k)}
            for v in sorted(slots):
                if v < ctx.public.num_items and v not in taken:
                    taken.add(v)
                    pairs.append((u, v))
                    break
        return Matching(pairs=tuple(pairs))

    return ProtocolSpec(
        name=f"one_shot:k={k}", num_rounds=1, message_fn=message, referee_fn=referee
    )


def _replay_awards(
    board: tuple[tuple[str, ...], ...], public: PublicInfo
) -> tuple[dict[int, int], set[int]]:
    """Deterministic award bookkeeping shared by players and referee:
    each round, every announced item goes to its lowest-index announcer
    still unmatched.  Returns (item -> player awards, matched players)."""
    width = _item_bits(public.num_items)
    awards: dict[int, int] = {}
    matched: set[int] = set()
    for rnd in board:
        wants: dict[int, list[int]] = {}
        for u, msg in enumerate(rnd):
            if len(msg) != 1 + width or msg[0] != "1":
                continue
            v = int(msg[1:], 2)
            if v < public.num_items:
                wants.setdefault(v, []).append(u)
        for v in sorted(wants):
            if v in awards:
                continue
            for u in sorted(wants[v]):
                if u not in matched:
                    awards[v] = u
                    matched.add(u)
                    break
    return awards, matched


def iterated_proposal(rounds: int, tie: str = "lowest") -> ProtocolSpec:
    """Each round, every still-unmatched player announces one demanded item
    not yet awarded on the blackboard (its lowest-index such item, or a
    seeded-uniform one), as a 1-bit activity flag plus a fixed-width item
    index.  Awards accumulate; the output is their union."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if tie not in ("lowest", "random"):
        raise ValueError(f"unknown tie rule {tie!r}")

    def message(ctx: MessageContext) -> str:
        width = _item_bits(ctx.public.num_items)
        awards, matched = _replay_awards(ctx.board, ctx.public)
        if ctx.player not in matched:
            options = [v for v in ctx.items if v not in awards]
            if options:
                v = options[0] if tie == "lowest" else ctx.local_rng.choice(options)
                return "1" + _encode_item(v, width)
        return "0" * (1 + width)

    def referee(ctx: RefereeContext) -> Matching:
        awards, _ = _replay_awards(ctx.transcript.rounds, ctx.public)
        return Matching(pairs=tuple(sorted((u, v) for v, u in awards.items())))

    return ProtocolSpec(
        name=f"iterated:r={rounds},tie={tie}",
        num_rounds=rounds,
        message_fn=message,
        referee_fn=referee,
    )


def _replay_auction(
    board: tuple[tuple[str, ...], ...], public: PublicInfo
) -> tuple[dict[int, int], dict[int, int]]:
    """Price/holder state from bids: per round, the lowest-index bidder on
    an item takes it from the current holder and the item's price rises by
    one increment of 2^-increment_bits.  Returns (item -> holder,
    item -> price in increments)."""
    width = _item_bits(public.num_items)
    holder: dict[int, int] = {}
    price: dict[int, int] = {}
    for rnd in board:
        bids: dict[int, list[int]] = {}
        holding = set(holder.values())
        for u, msg in enumerate(rnd):
            if len(msg) != 1 + width or msg[0] != "1" or u in holding:
                continue
            v = int(msg[1:], 2)
            if v < public.num_items:
                bids.setdefault(v, []).append(u)
        for v in sorted(bids):
            winner = min(bids[v])
            holder[v] = winner
            holding.add(winner)
            price[v] = price.get(v, 0) + 1
    return holder, price


def ascending_auction(round_cap: int = 64, increment_bits: int = 3) -> ProtocolSpec:
    """Ascending-price auction for unit-demand 0/1 valuations.

    Item prices start at zero and rise by 2^-increment_bits per contested
    round; every player not currently holding an item bids on its
    cheapest demanded item priced below 1, displacing the holder, who
    re-bids later.  Players with no affordable demand go silent; the run
    uses round_cap rounds (silent once bidding stops).  Output: the final
    holders."""
    if round_cap < 1:
        raise ValueError("round_cap must be >= 1")
    if increment_bits < 0:
        raise ValueError("increment_bits must be >= 0")
    unit = 1 << increment_bits  # price reaches 1 after `unit` increments

    def message(ctx: MessageContext) -> str:
        width = _item_bits(ctx.public.num_items)
        holder, price = _replay_auction(ctx.board, ctx.public)
        if ctx.player not in holder.values():
            affordable = [v for v in ctx.items if price.get(v, 0) < unit]
            if affordable:
                v = min(affordable, key=lambda x: (price.get(x, 0), x))
                return "1" + _encode_item(v, width)
        return "0" * (1 + width)

    def referee(ctx: RefereeContext) -> Matching:
        holder, _ = _replay_auction(ctx.transcript.rounds, ctx.public)
        return Matching(pairs=tuple(sorted((u, v) for v, u in holder.items())))

    return ProtocolSpec(
        name=f"auction:cap={round_cap},inc={increment_bits}",
        num_rounds=round_cap,
        message_fn=message,
        referee_fn=referee,
    )


def auction_bid_rounds(transcript: Transcript) -> int:
    """Rounds until the auction went quiet (no active flag)."""
    last = 0
    for r, rnd in enumerate(transcript.rounds):
        if any(m[:1] == "1" for m in rnd):
            last = r + 1
    return last


# ---------------------------------------------------------------------------
# String-addressable registry for the CLI


def parse_protocol(spec: str) -> ProtocolSpec:
    """Build a protocol from an id string like ``iterated:r=3,tie=random``."""
    name, _, rest = spec.partition(":")
    kv: dict[str, str] = {}
    if rest:
        for part in rest.split(","):
            key, _, val = part.partition("=")
            if not val:
                raise ValueError(f"malformed protocol parameter {part!r} in {spec!r}")
            kv[key.strip()] = val.strip()
    if name == "zero_round":
        proto = zero_round_referee(strategy=kv.pop("strategy", "identity"))
    elif name == "one_shot":
        proto = one_shot_announce(k=int(kv.pop("k", "1")))
    elif name == "iterated":
        proto = iterated_proposal(rounds=int(kv.pop("r", "1")), tie=kv.pop("tie", "lowest"))
    elif name == "auction":
        proto = ascending_auction(
            round_cap=int(kv.pop("cap", "64")), increment_bits=int(kv.pop("inc", "3"))
        )
    else:
        raise ValueError(f"unknown protocol id {name!r}")
    if kv:
        raise ValueError(f"unknown parameters {sorted(kv)} for protocol {name!r}")
    return proto
