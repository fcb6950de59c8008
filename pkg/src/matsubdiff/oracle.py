"""Verification and falsification of subgradient and convexity claims.

A candidate ``V`` is a subgradient of ``F`` at ``x`` when

    M(y) = F(y) - F(x) - sum_i (y_i - x_i) V_i

is PSD for every ``y``. For univariate ``F`` membership is decided exactly by
comparing ``V`` with the one-sided derivatives. In higher dimensions the
checks restrict ``F`` to sampled lines through ``x`` (each restriction is
univariate, so the exact test applies along the line) and also test ``M(y)``
directly at points on those lines. A clean pass there is reported as
``NotFalsified``, never as a proof.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import BudgetZero, DimensionMismatch
from .expr import ConvexMatrixExpr, _point, evaluate_batch
from .subgrad import MatTuple, make_rng, subdiff_interval_1d
from .symmat import DEFAULT_TOL, effective_tol, min_eig

# Radii for the raw inequality along each sampled line, tried in both signs.
RADIAL_GRID = (1e-3, 1e-1, 1.0, 10.0)
# Step sizes used to localize a witness once a line is known to fail.
_SCAN_STEPS = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 10.0, 100.0)


class Outcome(Enum):
    VERIFIED_EXACT = "VerifiedExact"
    NOT_FALSIFIED = "NotFalsified"
    FALSIFIED = "Falsified"


@dataclass(frozen=True)
class Witness:
    """Evidence against a subgradient candidate.

    ``kind == "raw"``: at ``y = x + t h`` the unit vector ``z`` gives
    ``<z, M(y) z> = margin`` below the PSD tolerance.

    ``kind == "derivative"``: the one-sided derivative along ``h`` violates
    the bound, ``<z, (F'(x; h) - sum_i h_i V_i) z> = margin < 0``.
    """

    kind: str
    z: np.ndarray
    margin: float
    y: np.ndarray | None = None
    h: np.ndarray | None = None
    t: float | None = None

    def to_dict(self):
        out = {"kind": self.kind, "z": self.z.tolist(), "margin": self.margin}
        for name in ("y", "h"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val.tolist()
        if self.t is not None:
            out["t"] = self.t
        return out


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    samples: int
    witness: Witness | None = None
    seed: int | None = None
    tol: float = DEFAULT_TOL

    @property
    def falsified(self):
        return self.outcome is Outcome.FALSIFIED

    def to_dict(self):
        out = {"outcome": self.outcome.value, "samples": self.samples,
               "seed": self.seed, "tol": self.tol}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        return out


def merge_verdicts(verdicts):
    """Combine shards of one check: any falsification wins, else counts add."""
    verdicts = list(verdicts)
    for v in verdicts:
        if v.falsified:
            return v
    if all(v.outcome is Outcome.VERIFIED_EXACT for v in verdicts):
        return verdicts[0]
    return Verdict(Outcome.NOT_FALSIFIED, sum(v.samples for v in verdicts),
                   seed=verdicts[0].seed, tol=verdicts[0].tol)


def _as_candidate(F, V):
    V = V if isinstance(V, MatTuple) else MatTuple(V)
    if V.d != F.input_dim or V.ell != F.output_dim:
        raise DimensionMismatch(
            f"candidate has shape (d={V.d}, l={V.ell}), "
            f"function has (d={F.input_dim}, l={F.output_dim})"
        )
    return V.array


def _directions(rng, d, budget):
    """Unit directions: all +-e_i, the normalized all-ones vector, then random."""
    eye = np.eye(d)
    fixed = [eye, -eye, np.ones((1, d)) / np.sqrt(d)]
    g = rng.standard_normal((budget, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack(fixed + [g])


def _line_points(rng, x, H):
    """Signed step sizes and points ``x + t h`` for every direction in ``H``."""
    n = H.shape[0]
    grid = np.array(RADIAL_GRID)
    extra = 10.0 ** rng.uniform(-6.0, 1.0, size=(n, 1))
    steps = np.hstack([np.tile(np.concatenate([grid, -grid]), (n, 1)), extra])
    T = steps.ravel()
    Hr = np.repeat(H, steps.shape[1], axis=0)
    return T, Hr, x + T[:, None] * Hr


def _raw_margins(F, x, Fx, Varr, T, Hr, Y):
    M = evaluate_batch(F, Y) - Fx - np.tensordot(Y - x, Varr, axes=(1, 0))
    lam, Z = min_eig(M)
    return lam, Z, effective_tol(M, 1.0)


def _scan_line(F, x, Fx, Varr, h, tol):
    """Look along ``x + t h`` (t > 0) for a point where ``M(y)`` is not PSD."""
    T = np.array(_SCAN_STEPS)
    Hr = np.tile(h, (T.size, 1))
    Y = x + T[:, None] * Hr
    lam, Z, scale = _raw_margins(F, x, Fx, Varr, T, Hr, Y)
    bad = np.flatnonzero(lam < -tol * scale)
    if bad.size == 0:
        return None
    k = bad[0]
    return Witness("raw", Z[k], float(lam[k]), y=Y[k], h=h.copy(), t=float(T[k]))


def _falsified(witness, seed, tol):
    return Verdict(Outcome.FALSIFIED, 0, witness, seed, tol)


def _line_test(F, x, Fx, Varr, H, tol):
    """Exact univariate test of ``t -> F(x + t h)`` at ``t = 0`` for each row of ``H``.

    ``W_h = sum_i h_i V_i`` must lie between ``-F'(x; -h)`` and ``F'(x; h)``.
    Returns a witness for the first failing direction, or None.
    """
    n = H.shape[0]
    X = np.tile(x, (2 * n, 1))
    D = F._ddir(X, np.vstack([H, -H]))
    W = np.tensordot(H, Varr, axes=(1, 0))
    # upper: F'(x; h) - W_h ;  lower: F'(x; -h) + W_h  (both PSD iff W_h is admissible)
    diffs = np.concatenate([D[:n] - W, D[n:] + W])
    lam, Z = min_eig(diffs)
    bad = np.flatnonzero(lam < -effective_tol(diffs, tol))
    if bad.size == 0:
        return None
    # Interleave so directions are reported in sampling order.
    k = min(bad, key=lambda j: (j % n, j // n))
    h = H[k % n] if k < n else -H[k % n]
    found = _scan_line(F, x, Fx, Varr, h, tol)
    if found is not None:
        return found
    return Witness("derivative", Z[k], float(lam[k]), h=h.copy())


def check_subgradient(F, x, V, budget=1000, seed=0, tol=DEFAULT_TOL, method="auto"):
    """Decide or probe whether ``V`` is a subgradient of ``F`` at ``x``.

    ``method="auto"``: exact for univariate ``F`` (``VerifiedExact`` or
    ``Falsified``). Otherwise ``budget`` random directions, on top of all
    ``+-e_i`` and the all-ones direction, are each tested by the exact
    one-dimensional criterion and by the raw inequality on a radial grid.

    ``method="raw"``: only the raw inequality at sampled points, in any
    dimension.
    """
    if budget < 1:
        raise BudgetZero("budget must be at least 1")
    if method not in ("auto", "raw"):
        raise ValueError(f"unknown method {method!r}")
    x = _point(F, x)
    Varr = _as_candidate(F, V)
    Fx = F._eval(x[None, :])[0]

    if F.input_dim == 1 and method == "auto":
        interval = subdiff_interval_1d(F, x)
        lower, upper = interval.contains(Varr[0], tol=tol)
        if lower.is_psd and upper.is_psd:
            return Verdict(Outcome.VERIFIED_EXACT, 1, None, seed, tol)
        if not upper.is_psd:
            h, bad = np.array([1.0]), upper
        else:
            h, bad = np.array([-1.0]), lower
        found = _scan_line(F, x, Fx, Varr, h, tol)
        if found is None:
            found = Witness("derivative", bad.witness, bad.min_eigenvalue, h=h)
        return _falsified(found, seed, tol)

    rng = make_rng(seed)
    H = _directions(rng, F.input_dim, int(budget))
    if method == "auto":
        found = _line_test(F, x, Fx, Varr, H, tol)
        if found is not None:
            return _falsified(found, seed, tol)
    T, Hr, Y = _line_points(rng, x, H)
    lam, Z, scale = _raw_margins(F, x, Fx, Varr, T, Hr, Y)
    bad = np.flatnonzero(lam < -tol * scale)
    if bad.size:
        k = bad[0]
        w = Witness("raw", Z[k], float(lam[k]), y=Y[k], h=Hr[k].copy(), t=float(T[k]))
        return _falsified(w, seed, tol)
    return Verdict(Outcome.NOT_FALSIFIED, H.shape[0], None, seed, tol)


def check_scalarized(F, x, V, z, budget=1000, seed=0, tol=DEFAULT_TOL):
    """Probe the scalar inequality ``F_z(y) - F_z(x) >= sum_i <z, V_i z> (y_i - x_i)``.

    Here ``F_z(y) = <z, F(y) z>``. Sample points are drawn exactly as in
    :func:`check_subgradient`, and a violation is reported with the unit
    vector ``z / |z|`` so it is also a witness against ``V`` itself.
    """
    if budget < 1:
        raise BudgetZero("budget must be at least 1")
    x = _point(F, x)
    Varr = _as_candidate(F, V)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (F.output_dim,):
        raise DimensionMismatch(f"z must have length {F.output_dim}, got shape {z.shape}")
    rng = make_rng(seed)
    H = _directions(rng, F.input_dim, int(budget))
    nz = np.linalg.norm(z)
    if nz == 0.0:
        return Verdict(Outcome.NOT_FALSIFIED, H.shape[0], None, seed, tol)
    u = z / nz
    Fx = F._eval(x[None, :])[0]
    T, Hr, Y = _line_points(rng, x, H)
    M = evaluate_batch(F, Y) - Fx - np.tensordot(Y - x, Varr, axes=(1, 0))
    margins = np.einsum("i,kij,j->k", u, M, u)
    bad = np.flatnonzero(margins < -effective_tol(M, tol))
    if bad.size:
        k = bad[0]
        w = Witness("raw", u, float(margins[k]), y=Y[k], h=Hr[k].copy(), t=float(T[k]))
        return _falsified(w, seed, tol)
    return Verdict(Outcome.NOT_FALSIFIED, H.shape[0], None, seed, tol)


@dataclass(frozen=True)
class ConvexityWitness:
    """``<z, (a F(x1) + (1-a) F(x2) - F(a x1 + (1-a) x2)) z> = margin < 0``."""

    x1: np.ndarray
    x2: np.ndarray
    alpha: float
    z: np.ndarray
    margin: float

    def to_dict(self):
        return {"x1": self.x1.tolist(), "x2": self.x2.tolist(), "alpha": self.alpha,
                "z": self.z.tolist(), "margin": self.margin}


def _batch_evaluator(F_raw, input_dim):
    if isinstance(F_raw, ConvexMatrixExpr):
        return F_raw.input_dim, lambda X: evaluate_batch(F_raw, X)
    if input_dim is None:
        raise ValueError("input_dim is required for a plain callable")

    def ev(X):
        return np.array([np.asarray(F_raw(row), dtype=float) for row in X])

    return int(input_dim), ev


def falsify_convexity(F_raw, budget=10_000, seed=0, tol=DEFAULT_TOL, input_dim=None):
    """Search for a violation of Loewner convexity.

    ``F_raw`` is an expression or any callable mapping a length-``input_dim``
    vector to a symmetric matrix. Pairs ``(-e_i, e_i)`` and ``(-1, 1)`` at
    ``alpha = 1/2`` are tried before ``budget`` random quadruples; the
    maximally violating ``z`` (the bottom eigenvector of the convexity gap)
    is used for each. Returns the first :class:`ConvexityWitness` found, or
    None.
    """
    d, ev = _batch_evaluator(F_raw, input_dim)
    rng = make_rng(seed)
    eye = np.eye(d)
    ones = np.ones((1, d))
    X1 = np.vstack([-eye, -ones])
    X2 = np.vstack([eye, ones])
    A = np.full(d + 1, 0.5)
    scale = 10.0 ** rng.uniform(-3.0, 1.0, size=(budget, 1))
    X1 = np.vstack([X1, rng.standard_normal((budget, d)) * scale])
    X2 = np.vstack([X2, rng.standard_normal((budget, d)) * scale])
    A = np.concatenate([A, rng.random(budget)])
    chunk = 4096
    for start in range(0, A.size, chunk):
        sl = slice(start, start + chunk)
        x1, x2, a = X1[sl], X2[sl], A[sl]
        gap = (a[:, None, None] * ev(x1) + (1 - a)[:, None, None] * ev(x2)
               - ev(a[:, None] * x1 + (1 - a)[:, None] * x2))
        lam, Z = min_eig(gap)
        bad = np.flatnonzero(lam < -effective_tol(gap, tol))
        if bad.size:
            k = bad[0]
            return ConvexityWitness(x1[k].copy(), x2[k].copy(), float(a[k]), Z[k], float(lam[k]))
    return None
