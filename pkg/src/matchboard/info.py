"""Finite-distribution information measures and randomized law checks.

All quantities are computed in nats internally (so Pinsker's inequality
holds with the bare 1/2 constant); log_base converts on the way out.
Zero-probability outcomes and zero-mass conditioning events contribute
zero by convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-12
INEQUALITY_TOL = 1e-9
EQUALITY_TOL = 1e-10


class SupportMismatchError(ValueError):
    pass


def _as_prob_array(values, what: str) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.size and a.min() < 0:
        raise ValueError(f"{what}: negative probability {a.min()}")
    if abs(a.sum() - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"{what}: probabilities sum to {a.sum()!r}, not 1")
    a.flags.writeable = False
    return a


class DiscreteDistribution:
    """A probability vector over an indexed finite support."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        object.__setattr__(self, "probs", _as_prob_array(probs, "distribution"))

    def __len__(self) -> int:
        return len(self.probs)

    def __setattr__(self, *args):
        raise AttributeError("DiscreteDistribution is immutable")


class JointTable:
    """A joint probability table over named finite variables."""

    __slots__ = ("axes", "table")

    def __init__(self, axes, table):
        axes = tuple(axes)
        t = np.asarray(table, dtype=float)
        if t.ndim != len(axes):
            raise ValueError(f"{t.ndim}-d table for {len(axes)} axes")
        if len(set(axes)) != len(axes):
            raise ValueError("duplicate axis names")
        _as_prob_array(t.reshape(-1), "joint table")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", t)

    def __setattr__(self, *args):
        raise AttributeError("JointTable is immutable")

    def _axis_indices(self, names) -> tuple[int, ...]:
        if isinstance(names, str):
            names = (names,)
        out = []
        for name in names:
            if name not in self.axes:
                raise KeyError(f"axis {name!r} not in {self.axes}")
            out.append(self.axes.index(name))
        return tuple(out)

    def marginal(self, names) -> DiscreteDistribution:
        """Marginal over the named axes, flattened in their given order."""
        keep = self._axis_indices(names)
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        t = np.transpose(self.table, keep + drop)
        if drop:
            t = t.sum(axis=tuple(range(len(keep), len(self.axes))))
        return DiscreteDistribution(t.reshape(-1))


def statistical_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Half the l1 distance; a metric in [0, 1] on a common support."""
    if len(p) != len(q):
        raise SupportMismatchError(f"supports differ: {len(p)} vs {len(q)}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def _convert(nats: float, log_base: float | None) -> float:
    if log_base is None:
        return nats
    return nats / math.log(log_base)


def kl_divergence(
    p: DiscreteDistribution, q: DiscreteDistribution, log_base: float | None = None
) -> float:
    """sum p log(p/q), with 0 log(0/q) = 0; +inf where p escapes q's support."""
    if len(p) != len(q):
        raise SupportMismatchError(f"supports differ: {len(p)} vs {len(q)}")
    pv, qv = p.probs, q.probs
    mask = pv > 0
    if np.any(qv[mask] == 0):
        return math.inf
    nats = float(np.sum(pv[mask] * np.log(pv[mask] / qv[mask])))
    return _convert(nats, log_base)


def _entropy_nats(t: np.ndarray) -> float:
    v = t.reshape(-1)
    v = v[v > 0]
    return float(-np.sum(v * np.log(v)))


def entropy(p: DiscreteDistribution, log_base: float | None = None) -> float:
    return _convert(_entropy_nats(p.probs), log_base)


def _grouped_table(j: JointTable, a, b, c) -> np.ndarray:
    """Reshape to a 3-d (|A|, |B|, |C|) array for grouped axis sets."""
    ia = j._axis_indices(a)
    ib = j._axis_indices(b)
    ic = j._axis_indices(c) if c else ()
    used = ia + ib + ic
    if len(set(used)) != len(used):
        raise ValueError("axis groups overlap")
    rest = tuple(i for i in range(len(j.axes)) if i not in used)
    t = np.transpose(j.table, ia + ib + ic + rest)
    if rest:
        t = t.sum(axis=tuple(range(len(used), len(j.axes))))
    shape = j.table.shape
    na = math.prod(shape[i] for i in ia)
    nb = math.prod(shape[i] for i in ib)
    nc = math.prod(shape[i] for i in ic) if ic else 1
    return t.reshape(na, nb, nc)


def conditional_mutual_information(
    j: JointTable, a, b, c=(), log_base: float | None = None
) -> float:
    """I(A;B|C) by the expectation-of-divergence form,
    sum p(abc) log[ p(abc) p(c) / (p(ac) p(bc)) ]."""
    t = _grouped_table(j, a, b, c)
    p_c = t.sum(axis=(0, 1))
    p_ac = t.sum(axis=1)
    p_bc = t.sum(axis=0)
    mask = t > 0
    num = t * p_c[None, None, :]
    den = p_ac[:, None, :] * p_bc[None, :, :]
    ratio = np.where(mask, num, 1.0) / np.where(mask, den, 1.0)
    nats = float(np.sum(np.where(mask, t * np.log(ratio), 0.0)))
    return _convert(max(nats, 0.0), log_base)


def mutual_information(j: JointTable, a, b, log_base: float | None = None) -> float:
    return conditional_mutual_information(j, a, b, (), log_base)


def cmi_via_entropies(j: JointTable, a, b, c=(), log_base: float | None = None) -> float:
    """The H(A|C) - H(A|BC) route, kept separate as a cross-check."""
    t = _grouped_table(j, a, b, c)
    nats = (
        _entropy_nats(t.sum(axis=1))  # H(AC)
        - _entropy_nats(t.sum(axis=(0, 1)))  # H(C)
        - _entropy_nats(t)  # H(ABC)
        + _entropy_nats(t.sum(axis=0))  # H(BC)
    )
    return _convert(nats, log_base)


# ---------------------------------------------------------------------------
# Randomized checks of the standard information laws


@dataclass(frozen=True)
class FactCheck:
    name: str
    trials: int
    worst_margin: float  # most negative slack observed; >= -tolerance passes
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class InequalityReport:
    checks: tuple[FactCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> bytes:
        doc = [
            {
                "name": c.name,
                "trials": c.trials,
                "worst_margin": c.worst_margin,
                "tolerance": c.tolerance,
                "pass": c.passed,
            }
            for c in self.checks
        ]
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


FACT_NAMES = (
    "pinsker",
    "mi_entropy_bound",
    "chain_rule",
    "conditioning_increases",
    "conditioning_decreases",
    "dpi_markov",
    "dpi_function",
    "expectation_l1",
)


def _random_probs(rng: np.random.Generator, shape) -> np.ndarray:
    t = rng.exponential(1.0, size=shape)
    if rng.random() < 0.25:  # exercise the zero conventions
        z = rng.random(size=np.shape(t)) < 0.3
        if not z.all():
            t = np.where(z, 0.0, t)
    return t / t.sum()


def _stochastic(rng: np.random.Generator, shape) -> np.ndarray:
    """Random conditional table, normalized over the last axis."""
    t = rng.exponential(1.0, size=shape)
    return t / t.sum(axis=-1, keepdims=True)


def check_inequalities(trials: int, seed: int) -> InequalityReport:
    """Draw random small joint tables (with the hypothesised independence
    structure built in exactly where a law demands it) and evaluate both
    sides of every law.  A single violation is a build-failing event."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    margins: dict[str, float] = {}

    def note(name: str, margin: float) -> None:
        margins[name] = min(margins.get(name, math.inf), margin)

    for _ in range(trials):
        na, nb, nc, nd = (int(rng.integers(2, 4)) for _ in range(4))

        # Pinsker: |p - q|^2 <= KL(p||q) / 2
        k = int(rng.integers(2, 7))
        p = DiscreteDistribution(_random_probs(rng, k))
        q = DiscreteDistribution(_random_probs(rng, k))
        d = kl_divergence(p, q)
        if math.isfinite(d):
            note("pinsker", 0.5 * d - statistical_distance(p, q) ** 2)

        # I(A;C|D) <= H(A|D)
        j3 = JointTable(("A", "C", "D"), _random_probs(rng, (na, nc, nd)))
        t = _grouped_table(j3, "A", "C", "D")
        h_a_given_d = _entropy_nats(t.sum(axis=1)) - _entropy_nats(t.sum(axis=(0, 1)))
        note(
            "mi_entropy_bound",
            h_a_given_d - conditional_mutual_information(j3, "A", "C", "D"),
        )

        # chain rule: I(AB;C|D) = I(A;C|D) + I(B;C|AD)
        j4 = JointTable(("A", "B", "C", "D"), _random_probs(rng, (na, nb, nc, nd)))
        lhs = conditional_mutual_information(j4, ("A", "B"), "C", "D")
        rhs = conditional_mutual_information(j4, "A", "C", "D")
        rhs += conditional_mutual_information(j4, "B", "C", ("A", "D"))
        note("chain_rule", EQUALITY_TOL - abs(lhs - rhs))

        # conditioning on independent variables increases information:
        # p(abcd) = p(c) p(a|c) p(d|c) p(b|acd), so I(A;D|C) = 0 and
        # I(A;B|C) <= I(A;B|CD) must hold
        pc = _random_probs(rng, nc)
        pa_c = _stochastic(rng, (nc, na))
        pd_c = _stochastic(rng, (nc, nd))
        pb_acd = _stochastic(rng, (na, nc, nd, nb))
        p_acd = np.einsum("c,ca,cd->acd", pc, pa_c, pd_c)
        p_abcd = np.einsum("acd,acdb->abcd", p_acd, pb_acd)
        j_inc = JointTable(("A", "B", "C", "D"), p_abcd)
        note(
            "conditioning_increases",
            conditional_mutual_information(j_inc, "A", "B", ("C", "D"))
            - conditional_mutual_information(j_inc, "A", "B", "C"),
        )

        # conditioning decreases information when I(B;D|AC) = 0:
        # p(abcd) = p(ac) p(b|ac) p(d|ac)
        p_ac = _random_probs(rng, (na, nc))
        pb_ac = _stochastic(rng, (na, nc, nb))
        pd_ac = _stochastic(rng, (na, nc, nd))
        p_abcd = np.einsum("ac,acb,acd->abcd", p_ac, pb_ac, pd_ac)
        j_dec = JointTable(("A", "B", "C", "D"), p_abcd)
        note(
            "conditioning_decreases",
            conditional_mutual_information(j_dec, "A", "B", "C")
            - conditional_mutual_information(j_dec, "A", "B", ("C", "D")),
        )

        # data processing along a Markov chain X -> Y -> Z
        p_xy = _random_probs(rng, (na, nb))
        pz_y = _stochastic(rng, (nb, nc))
        j_dp = JointTable(("X", "Y", "Z"), np.einsum("xy,yz->xyz", p_xy, pz_y))
        note(
            "dpi_markov",
            mutual_information(j_dp, "X", "Y") - mutual_information(j_dp, "X", "Z"),
        )

        # data processing under a deterministic f: I(A;B|C) >= I(A;f(B)|C)
        f = rng.integers(0, nb, size=nb)
        j_abc = JointTable(("A", "B", "C"), _random_probs(rng, (na, nb, nc)))
        fb = np.zeros((na, int(f.max()) + 1, nc))
        for y in range(nb):
            fb[:, f[y], :] += j_abc.table[:, y, :]
        j_fabc = JointTable(("A", "FB", "C"), fb)
        note(
            "dpi_function",
            conditional_mutual_information(j_abc, "A", "B", "C")
            - conditional_mutual_information(j_fabc, "A", "FB", "C"),
        )

        # E_nu[X] <= E_mu[X] + |mu - nu| X_max for bounded non-negative X
        k = int(rng.integers(2, 7))
        mu = DiscreteDistribution(_random_probs(rng, k))
        nu = DiscreteDistribution(_random_probs(rng, k))
        x = rng.random(k) * 10.0
        note(
            "expectation_l1",
            float(mu.probs @ x)
            + statistical_distance(mu, nu) * float(x.max(initial=0.0))
            - float(nu.probs @ x),
        )

    checks = []
    for name in FACT_NAMES:
        tol = 0.0 if name == "chain_rule" else INEQUALITY_TOL
        worst = margins[name]
        checks.append(
            FactCheck(
                name=name,
                trials=trials,
                worst_margin=worst,
                tolerance=tol,
                passed=worst >= -tol,
            )
        )
    return InequalityReport(checks=tuple(checks))
