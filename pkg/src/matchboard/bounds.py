"""Theoretical envelopes for the canonical parameterization.

All integer quantities are exact; the round budget t(r) involves square
roots and is evaluated with enough working precision for every digit of
the integer part plus a configurable tail.  The approximation envelope
5 * n^(1 - 1/5^(r+1)) collapses to the exact integer 5 * n / ell because
the bandwidth parameter satisfies ell = n^(1/5^(r+1)) identically; that
identity is verified rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .distribution import ParamsTable, canonical_params

GUARD_DIGITS = 40


@dataclass(frozen=True)
class BoundReport:
    ell: int
    rounds: int
    n: tuple[int, ...]
    m: tuple[int, ...]
    d: tuple[int, ...]
    delta: tuple[Fraction, ...]  # 1 / n_k per level
    t_value: str  # decimal string at working precision
    t_digits: int  # significant digits carried
    envelope: int  # 5 * n_r^(1 - 1/5^(r+1)), exact
    lower_bound_base: int  # the Omega(n^(1/5^(r+1))) growth equals ell
    lower_bound_exponent: Fraction

    def to_json(self) -> bytes:
        doc = {
            "ell": self.ell,
            "rounds": self.rounds,
            "n": [str(x) for x in self.n],
            "m": [str(x) for x in self.m],
            "d": [str(x) for x in self.d],
            "delta": [f"1/{x}" for x in self.n],
            "t": self.t_value,
            "t_digits": self.t_digits,
            "envelope": str(self.envelope),
            "lower_bound_base": self.lower_bound_base,
            "lower_bound_exponent": str(self.lower_bound_exponent),
        }
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


def round_budget_mpf(params: ParamsTable, extra_digits: int = GUARD_DIGITS):
    """t(r) = 5 n_r (sum over k < r of (1/n_k)^(1/2)) + 1 as an mpmath
    float carrying every integer digit plus extra_digits more."""
    r = params.rounds
    n_r = params.n[r]
    digits = len(str(5 * n_r)) + extra_digits
    with mpmath.workdps(digits):
        total = mpmath.mpf(0)
        for k in range(r):
            total += 1 / mpmath.sqrt(mpmath.mpf(params.n[k]))
        t = 5 * mpmath.mpf(n_r) * total + 1
        return +t, digits


def compute_bounds(ell: int, rounds: int, extra_digits: int = GUARD_DIGITS) -> BoundReport:
    params = canonical_params(ell, rounds)
    n_r = params.n[rounds]
    exponent = Fraction(1, 5 ** (rounds + 1))
    if ell ** (5 ** (rounds + 1)) != n_r:
        raise AssertionError("bandwidth identity ell = n^(1/5^(r+1)) failed")
    envelope_frac = Fraction(5 * n_r, ell)
    if envelope_frac.denominator != 1:
        raise AssertionError("envelope 5n/ell is not integral")
    t, digits = round_budget_mpf(params, extra_digits)
    with mpmath.workdps(digits):
        t_str = mpmath.nstr(t, digits, strip_zeros=False)
    return BoundReport(
        ell=ell,
        rounds=rounds,
        n=params.n,
        m=params.m,
        d=params.d,
        delta=tuple(Fraction(1, nk) for nk in params.n),
        t_value=t_str,
        t_digits=digits,
        envelope=int(envelope_frac),
        lower_bound_base=ell,
        lower_bound_exponent=exponent,
    )


