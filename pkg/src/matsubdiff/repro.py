"""Named worked examples with machine-checkable facts.

Each example pairs an expression with a list of :class:`Fact` objects whose
checks call the public API, so tolerances are whatever the API uses.

    >>> ex = build_example("diag-max-2x")
    >>> all(f.check() for f in ex.facts)
    True
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import UnknownExample
from .expr import (
    AbsCoord,
    evaluate,
    max_affine,
    mk_block_diag,
    mk_double,
    mk_lift,
    mk_sum,
    scalarize_eval,
)
from .oracle import Outcome, check_subgradient, falsify_convexity
from .subgrad import MatTuple, clarke_sample, make_rng, subdiff_interval_1d, subgradient

EXACT = 1e-12


@dataclass(frozen=True)
class Fact:
    description: str
    check: Callable[[], bool]


@dataclass(frozen=True)
class PaperExample:
    name: str
    expression: object
    facts: list = field(default_factory=list)

    def run(self):
        """``[(description, passed), ...]``; a raising check counts as failed."""
        out = []
        for fact in self.facts:
            try:
                ok = bool(fact.check())
            except Exception:  # noqa: BLE001 - reported as a failed fact
                ok = False
            out.append((fact.description, ok))
        return out


def _close(A, B, atol=EXACT):
    return np.max(np.abs(np.asarray(A) - np.asarray(B))) <= atol


def ramp():
    """``x -> max{0, 2x}`` on the real line."""
    return max_affine([([0.0], 0.0), ([2.0], 0.0)])


def abs_sum_2x2():
    """``|x1| [[1,1],[1,1]] + |x2| [[1,-1],[-1,1]]``."""
    F1 = mk_lift(AbsCoord(0, 2), [[1.0, 1.0], [1.0, 1.0]])
    F2 = mk_lift(AbsCoord(1, 2), [[1.0, -1.0], [-1.0, 1.0]])
    return F1, F2, mk_sum(F1, F2)


def diag_ramp():
    """``diag(max{0,2x}, max{0,2x})`` and its two single-entry summands."""
    F1 = mk_block_diag(mk_lift(ramp(), [[1.0]]), mk_lift(ramp(), [[0.0]]))
    F2 = mk_block_diag(mk_lift(ramp(), [[0.0]]), mk_lift(ramp(), [[1.0]]))
    F = mk_block_diag(mk_lift(ramp(), [[1.0]]), mk_lift(ramp(), [[1.0]]))
    return F1, F2, F


V0 = np.array([[1.0, 1.0], [1.0, 1.0]])


def forced_entries(interval, tol=EXACT):
    """Mask of entries shared by every member of a Loewner interval.

    If ``(right - left)_ii`` vanishes then ``0 <= V - left <= right - left``
    forces row and column ``i`` of ``V`` to equal those of ``left``.
    """
    width = np.diag(np.asarray(interval.right) - np.asarray(interval.left))
    pinned = np.abs(width) <= tol
    return pinned[:, None] | pinned[None, :]


def _abs_sum_example():
    F1, F2, F = abs_sum_2x2()

    def identity():
        rng = make_rng(2024)
        for _ in range(100):
            x, z = rng.uniform(-10, 10, 2), rng.uniform(-10, 10, 2)
            expected = abs(x[0]) * (z[0] + z[1]) ** 2 + abs(x[1]) * (z[0] - z[1]) ** 2
            if abs(scalarize_eval(F, z, x) - expected) > EXACT * (1 + abs(expected)):
                return False
        return True

    def pattern():
        V = subgradient(F, [0.0, 0.0]).value.array
        t, s = V[0, 0, 0], V[1, 0, 0]
        return (_close(V[0], t * np.ones((2, 2)))
                and _close(V[1], s * np.array([[1.0, -1.0], [-1.0, 1.0]]))
                and -1 <= t <= 1 and -1 <= s <= 1)

    def corners():
        P, Q = np.ones((2, 2)), np.array([[1.0, -1.0], [-1.0, 1.0]])
        for t in (-1.0, 1.0):
            for s in (-1.0, 1.0):
                v = check_subgradient(F, [0.0, 0.0], MatTuple([t * P, s * Q]), budget=1000, seed=1)
                if v.falsified:
                    return False
        return True

    facts = [
        Fact("F(1,-2) = [[3,-1],[-1,3]]",
             lambda: _close(evaluate(F, [1.0, -2.0]), [[3.0, -1.0], [-1.0, 3.0]])),
        Fact("<z,F(x)z> = |x1|(z1+z2)^2 + |x2|(z1-z2)^2 at 100 random (x, z)", identity),
        Fact("no convexity violation found (budget 10^4)",
             lambda: falsify_convexity(F, budget=10_000, seed=3) is None),
        Fact("forward subgradient at 0 has the form ([[t,t],[t,t]], [[s,-s],[-s,s]])", pattern),
        Fact("corner pairs t, s = +-1 are not falsified", corners),
    ]
    return PaperExample("abs-sum-2x2", F, facts)


def _diag_max_example():
    _, _, F = diag_ramp()
    interval = subdiff_interval_1d(F, [0.0])
    zero, two = np.zeros((2, 2)), 2.0 * np.eye(2)

    def clarke_endpoints():
        samples = clarke_sample(F, [0.0], n=1000, radius=1e-3, seed=7)
        return all(_close(s.array[0], zero, 1e-9) or _close(s.array[0], two, 1e-9)
                   for s in samples)

    def v0_off_clarke():
        # min_t ||V0 - t I||_F^2 = 2(1 - t)^2 + 2 >= 2
        ts = np.linspace(0.0, 2.0, 2001)
        dist = np.sqrt(2 * (1 - ts) ** 2 + 2)
        direct = [np.linalg.norm(V0 - t * np.eye(2)) for t in (0.0, 1.0, 2.0)]
        return dist.min() >= np.sqrt(2) - EXACT and min(direct) >= np.sqrt(2) - EXACT

    facts = [
        Fact("F'_+(0) = 2 I", lambda: _close(interval.right, two)),
        Fact("F'_-(0) = 0", lambda: _close(interval.left, zero)),
        Fact("V0 = [[1,1],[1,1]] verified exactly as a subgradient at 0",
             lambda: check_subgradient(F, [0.0], [V0]).outcome is Outcome.VERIFIED_EXACT),
        Fact("Clarke samples at 0 are the endpoints 0 and 2I", clarke_endpoints),
        Fact("V0 lies at distance >= sqrt(2) from {tI : t in [0, 2]}", v0_off_clarke),
    ]
    return PaperExample("diag-max-2x", F, facts)


def _sum_strict_example():
    F1, F2, F = diag_ramp()
    i1 = subdiff_interval_1d(F1, [0.0])
    i2 = subdiff_interval_1d(F2, [0.0])

    def off_diagonal_pinned():
        m1, m2 = forced_entries(i1), forced_entries(i2)
        # Every sum of members has entry (0, 1) fixed to left1 + left2 there.
        fixed = np.asarray(i1.left)[0, 1] + np.asarray(i2.left)[0, 1]
        return bool(m1[0, 1] and m2[0, 1]) and fixed != V0[0, 1]

    def random_rejected():
        rng = make_rng(11)
        for _ in range(200):
            a, c = rng.uniform(-3, 3, 2)
            b = rng.choice([-1.0, 1.0]) * rng.uniform(1e-6, 3)
            V = [[a, b], [b, c]]
            if not check_subgradient(F1, [0.0], [V]).falsified:
                return False
        return True

    facts = [
        Fact("dF1(0) is the interval [0, diag(2,0)]",
             lambda: _close(i1.left, np.zeros((2, 2))) and _close(i1.right, np.diag([2.0, 0.0]))),
        Fact("members of dF1(0) have V12 = V22 = 0", lambda: bool(forced_entries(i1)[0, 1] and forced_entries(i1)[1, 1])),
        Fact("members of dF2(0) have V11 = V12 = 0", lambda: bool(forced_entries(i2)[0, 0] and forced_entries(i2)[0, 1])),
        Fact("V0 is not in dF1(0) + dF2(0)", off_diagonal_pinned),
        Fact("V0 is in d(F1 + F2)(0)",
             lambda: check_subgradient(mk_sum(F1, F2), [0.0], [V0]).outcome is Outcome.VERIFIED_EXACT),
        Fact("candidates with V12 != 0 are rejected for F1", random_rejected),
    ]
    return PaperExample("sum-strict", mk_sum(F1, F2), facts)


def _double_abs_example():
    inner = mk_lift(AbsCoord(0, 1), [[1.0]])
    G = mk_double(inner)
    K = np.array([[1.0, -1.0], [-1.0, 1.0]])

    def values():
        return all(_close(evaluate(G, [x]), abs(x) * K) for x in (-2.5, -1.0, 0.0, 0.3, 4.0))

    def scalarization():
        rng = make_rng(5)
        for _ in range(100):
            x, z = rng.uniform(-10, 10), rng.uniform(-10, 10, 2)
            expected = abs(x) * (z[0] - z[1]) ** 2
            if abs(scalarize_eval(G, z, [x]) - expected) > EXACT * (1 + expected):
                return False
        return True

    def doubled_subgradient():
        iv = subdiff_interval_1d(G, [0.0])
        for v in (-1.0, -0.25, 0.0, 0.5, 1.0):
            if check_subgradient(G, [0.0], [v * K]).outcome is not Outcome.VERIFIED_EXACT:
                return False
        return _close(iv.left, -K) and _close(iv.right, K)

    facts = [
        Fact("G(x) = |x| [[1,-1],[-1,1]]", values),
        Fact("<z,G(x)z> = |x| (z1 - z2)^2", scalarization),
        Fact("no convexity violation found (budget 10^4)",
             lambda: falsify_convexity(G, budget=10_000, seed=3) is None),
        Fact("dG(0) = {v [[1,-1],[-1,1]] : v in [-1, 1]} endpoints and interior verified",
             doubled_subgradient),
    ]
    return PaperExample("double-abs", G, facts)


_REGISTRY = {
    "abs-sum-2x2": _abs_sum_example,
    "diag-max-2x": _diag_max_example,
    "sum-strict": _sum_strict_example,
    "double-abs": _double_abs_example,
}

EXAMPLE_NAMES = tuple(_REGISTRY)


def build_example(name):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_NAMES)}") from None
    return factory()
