"""Statistical check that a single bidder cannot tell the hidden item block
from a fooling block.

Conditioned on a fixed incident set, one bidder's edge pattern inside the
hidden block and inside a fooling block are identically distributed (the
construction's load-bearing property).  The check samples instances,
conditions on the lexicographically-smallest incident set by rejection,
extracts both block-local patterns of the chosen bidder and runs a
two-sample chi-square test on the pattern frequency tables.  The "flat"
sampler variant, which draws fooling patterns as unstructured subsets, is
the intended negative control: at two or more composite levels it is
detectably different.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import chi2_contingency

from .distribution import (
    RECURSIVE,
    IntractableError,
    ParamsTable,
    sample_mu,
)
from .seeding import derive_seed

HIDDEN_VS_FOOLING = "hidden-vs-fooling"
HIDDEN_VS_HIDDEN = "hidden-vs-hidden"


@dataclass(frozen=True)
class MarginalTestReport:
    p_value: float
    statistic: float
    dof: int
    samples_total: int
    samples_conditioned: int
    pattern_cells: int
    significance: float
    reject: bool
    fooling_mode: str
    compare: str


def marginal_pattern_support(params: ParamsTable, level: int) -> int:
    """Number of distinct single-bidder patterns within one level-`level`
    item block."""
    if level == 0:
        return params.m[0]
    lp = params.levels[level - 1]
    sub = marginal_pattern_support(params, level - 1)
    return math.comb(
        lp.num_bidder_blocks + lp.num_fooling_blocks, lp.num_fooling_blocks + 1
    ) * sub ** (lp.num_fooling_blocks + 1)


def _block_pattern(adjacency: tuple[int, ...], lo: int, hi: int) -> tuple[int, ...]:
    return tuple(v - lo for v in adjacency if lo <= v < hi)


def marginal_indistinguishability_test(
    params: ParamsTable,
    bidder: int,
    num_samples: int,
    significance: float = 0.01,
    seed: int = 0,
    fooling_mode: str = RECURSIVE,
    compare: str = HIDDEN_VS_FOOLING,
    max_support: int = 4096,
) -> MarginalTestReport:
    """Two-sample chi-square comparison of one bidder's block-local edge
    patterns, conditioned on a fixed incident set.

    compare selects the pair: the hidden block against a fixed fooling
    block (the real check) or the hidden pattern split across alternating
    samples (a same-distribution control).
    """
    if params.rounds < 1:
        raise ValueError("test needs at least one composite level")
    if not 0 < significance < 1:
        raise ValueError("significance must be in (0, 1)")
    if compare not in (HIDDEN_VS_FOOLING, HIDDEN_VS_HIDDEN):
        raise ValueError(f"unknown comparison {compare!r}")
    lp = params.levels[-1]
    if compare == HIDDEN_VS_FOOLING and lp.num_fooling_blocks < 1:
        raise ValueError("no fooling blocks to compare against")
    support = marginal_pattern_support(params, params.rounds - 1)
    if support > max_support:
        raise IntractableError(
            f"pattern space has {support} cells, cap {max_support}; "
            "use smaller base/block parameters"
        )
    r = params.rounds
    n_child, m_child = params.n[r - 1], params.m[r - 1]
    block = bidder // n_child
    # condition on the smallest incident set: blocks {0, ..., F}
    target = tuple(range(lp.num_fooling_blocks + 1))
    counts_a: dict[tuple, int] = {}
    counts_b: dict[tuple, int] = {}
    kept = 0
    for t in range(num_samples):
        b = sample_mu(params, derive_seed(seed, "trial", t), fooling_mode=fooling_mode)
        meta = b.meta
        if meta.incident_blocks(block) != target:
            continue
        kept += 1
        adj = b.graph.adjacency[bidder]
        hid = meta.sigma[block]
        hidden_pat = _block_pattern(adj, hid * m_child, (hid + 1) * m_child)
        if compare == HIDDEN_VS_FOOLING:
            fool = meta.fooling_set[0]
            other_pat = _block_pattern(adj, fool * m_child, (fool + 1) * m_child)
            counts_a[hidden_pat] = counts_a.get(hidden_pat, 0) + 1
            counts_b[other_pat] = counts_b.get(other_pat, 0) + 1
        else:
            side = counts_a if kept % 2 == 0 else counts_b
            side[hidden_pat] = side.get(hidden_pat, 0) + 1
    cells = sorted(set(counts_a) | set(counts_b))
    if kept < 2 or len(cells) < 2:
        raise IntractableError(
            f"only {kept} conditioned samples over {len(cells)} cells; "
            "increase num_samples"
        )
    table = [
        [counts_a.get(c, 0) for c in cells],
        [counts_b.get(c, 0) for c in cells],
    ]
    stat, p_value, dof, _ = chi2_contingency(table)
    return MarginalTestReport(
        p_value=float(p_value),
        statistic=float(stat),
        dof=int(dof),
        samples_total=num_samples,
        samples_conditioned=kept,
        pattern_cells=len(cells),
        significance=significance,
        reject=bool(p_value < significance),
        fooling_mode=fooling_mode,
        compare=compare,
    )
