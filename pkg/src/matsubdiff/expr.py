"""Expression trees for matrix-convex functions ``F: R^d -> S^l``.

Every constructor here preserves convexity in the Loewner order, so any
expression built with the ``mk_*`` functions is a convex matrix-valued
function. Leaves are affine maps, constants and *lifts* ``f(x) * P`` of a
piecewise-affine convex scalar atom ``f`` by a PSD matrix ``P``.

Nodes evaluate on batches: ``node._eval(X)`` maps an ``(n, d)`` array of
points to an ``(n, l, l)`` stack, and ``node._ddir(X, H)`` returns the stack
of one-sided directional derivatives ``F'(x; h)``. The public functions
:func:`evaluate`, :func:`dir_deriv` and friends wrap these for single points.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatch,
    DimensionTooLarge,
    NegativeScale,
    NonFinite,
    NotPsd,
    NotUnivariate,
    ZeroDirection,
)
from .symmat import MAX_DIM, SymMat, as_symmat, loewner_leq, psd_verdict

MAX_INPUT_DIM = 16
# Pieces of a max-affine atom within this absolute gap of the max are active.
TIE_TOL = 1e-12


def _frozen(a, ndim=None, name="array"):
    a = np.array(a, dtype=float)
    if ndim is not None and a.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} must be finite")
    a.flags.writeable = False
    return a


def _check_input_dim(d):
    if d < 1:
        raise DimensionMismatch("input dimension must be at least 1")
    if d > MAX_INPUT_DIM:
        raise DimensionTooLarge(f"input dimension {d} exceeds the limit {MAX_INPUT_DIM}")


def _check_output_dim(ell):
    if ell > MAX_DIM:
        raise DimensionTooLarge(f"output dimension {ell} exceeds the limit {MAX_DIM}")


def _sym_array(a, name):
    """Dense symmetric array from a SymMat or array-like."""
    return _frozen(as_symmat(a).to_array(), 2, name)


class _Node:
    """Shared equality for immutable dataclass nodes holding numpy arrays."""

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        for f in dataclasses.fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True

    __hash__ = None


# --------------------------------------------------------------------------
# scalar atoms


class ScalarAtom(_Node):
    """Piecewise-affine convex function ``R^d -> R``."""

    input_dim: int

    def value(self, X):
        raise NotImplementedError

    def ddir(self, X, H):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class AffineScalar(ScalarAtom):
    """``f(x) = a . x + b``."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(self.a, 1, "a"))
        object.__setattr__(self, "b", float(self.b))
        if not np.isfinite(self.b):
            raise NonFinite("b must be finite")
        _check_input_dim(self.a.size)

    @property
    def input_dim(self):
        return self.a.size

    def value(self, X):
        return X @ self.a + self.b

    def ddir(self, X, H):
        return H @ self.a


@dataclass(frozen=True, eq=False)
class AbsCoord(ScalarAtom):
    """``f(x) = |x_i|`` with a zero-based coordinate index."""

    index: int
    input_dim: int

    def __post_init__(self):
        object.__setattr__(self, "index", int(self.index))
        object.__setattr__(self, "input_dim", int(self.input_dim))
        _check_input_dim(self.input_dim)
        if not 0 <= self.index < self.input_dim:
            raise DimensionMismatch(
                f"coordinate index {self.index} out of range for input dimension {self.input_dim}"
            )

    def value(self, X):
        return np.abs(X[:, self.index])

    def ddir(self, X, H):
        xi, hi = X[:, self.index], H[:, self.index]
        return np.where(np.abs(xi) <= TIE_TOL, np.abs(hi), np.sign(xi) * hi)


@dataclass(frozen=True, eq=False)
class MaxAffine(ScalarAtom):
    """``f(x) = max_k (a_k . x + b_k)``; ``slopes`` has one row per piece."""

    slopes: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        slopes = _frozen(self.slopes, 2, "slopes")
        offsets = _frozen(self.offsets, 1, "offsets")
        if slopes.shape[0] == 0:
            raise ValueError("max-affine atom needs at least one piece")
        if offsets.shape[0] != slopes.shape[0]:
            raise DimensionMismatch("slopes and offsets disagree on the number of pieces")
        _check_input_dim(slopes.shape[1])
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "offsets", offsets)

    @property
    def input_dim(self):
        return self.slopes.shape[1]

    def pieces(self, X):
        return X @ self.slopes.T + self.offsets

    def active(self, X):
        v = self.pieces(X)
        return v >= v.max(axis=1, keepdims=True) - TIE_TOL

    def value(self, X):
        return self.pieces(X).max(axis=1)

    def ddir(self, X, H):
        slopes_h = H @ self.slopes.T
        return np.where(self.active(X), slopes_h, -np.inf).max(axis=1)


def max_affine(pieces):
    """Build a :class:`MaxAffine` from ``[(a_k, b_k), ...]``."""
    pieces = list(pieces)
    if not pieces:
        raise ValueError("max-affine atom needs at least one piece")
    return MaxAffine(np.array([p[0] for p in pieces], dtype=float),
                     np.array([p[1] for p in pieces], dtype=float))


# --------------------------------------------------------------------------
# matrix expressions


class ConvexMatrixExpr(_Node):
    """Base class of all expression nodes."""

    input_dim: int
    output_dim: int

    def children(self):
        return ()

    def _eval(self, X):
        raise NotImplementedError

    def _ddir(self, X, H):
        raise NotImplementedError

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other):
        if isinstance(other, ConvexMatrixExpr):
            return mk_sum(self, other)
        if isinstance(other, (SymMat, np.ndarray, list)):
            return mk_sum(self, mk_const(other, self.input_dim))
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, alpha):
        if np.isscalar(alpha):
            return mk_scale(alpha, self)
        return NotImplemented

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Const(ConvexMatrixExpr):
    value: np.ndarray
    input_dim: int

    @property
    def output_dim(self):
        return self.value.shape[0]

    def _eval(self, X):
        return np.broadcast_to(self.value, (X.shape[0],) + self.value.shape).copy()

    def _ddir(self, X, H):
        return np.zeros((X.shape[0],) + self.value.shape)


@dataclass(frozen=True, eq=False)
class Affine(ConvexMatrixExpr):
    """``F(x) = sum_i x_i V[i] + A0``; ``V`` has shape ``(d, l, l)``."""

    V: np.ndarray
    A0: np.ndarray

    @property
    def input_dim(self):
        return self.V.shape[0]

    @property
    def output_dim(self):
        return self.A0.shape[0]

    def _eval(self, X):
        return np.tensordot(X, self.V, axes=(1, 0)) + self.A0

    def _ddir(self, X, H):
        return np.tensordot(H, self.V, axes=(1, 0))


@dataclass(frozen=True, eq=False)
class Lift(ConvexMatrixExpr):
    """``F(x) = f(x) * P`` for a convex scalar atom ``f`` and PSD ``P``."""

    atom: ScalarAtom
    P: np.ndarray

    @property
    def input_dim(self):
        return self.atom.input_dim

    @property
    def output_dim(self):
        return self.P.shape[0]

    def children(self):
        return ()

    def _eval(self, X):
        return self.atom.value(X)[:, None, None] * self.P

    def _ddir(self, X, H):
        return self.atom.ddir(X, H)[:, None, None] * self.P


@dataclass(frozen=True, eq=False)
class Sum(ConvexMatrixExpr):
    left: ConvexMatrixExpr
    right: ConvexMatrixExpr

    @property
    def input_dim(self):
        return self.left.input_dim

    @property
    def output_dim(self):
        return self.left.output_dim

    def children(self):
        return (self.left, self.right)

    def _eval(self, X):
        return self.left._eval(X) + self.right._eval(X)

    def _ddir(self, X, H):
        return self.left._ddir(X, H) + self.right._ddir(X, H)


@dataclass(frozen=True, eq=False)
class Scale(ConvexMatrixExpr):
    alpha: float
    arg: ConvexMatrixExpr

    @property
    def input_dim(self):
        return self.arg.input_dim

    @property
    def output_dim(self):
        return self.arg.output_dim

    def children(self):
        return (self.arg,)

    def _eval(self, X):
        return self.alpha * self.arg._eval(X)

    def _ddir(self, X, H):
        return self.alpha * self.arg._ddir(X, H)


def _congruence(M, S):
    out = M @ S @ M.T
    return (out + np.swapaxes(out, -1, -2)) / 2.0


@dataclass(frozen=True, eq=False)
class Congruence(ConvexMatrixExpr):
    """``F_M(x) = M F(x) M^T`` with ``M`` of shape ``(m, l)``.

    ``invertible`` records whether ``M`` is square with ``|det M| > 1e-12``,
    in which case pushing subgradients through ``M`` reaches all of them.
    """

    M: np.ndarray
    arg: ConvexMatrixExpr
    invertible: bool

    @property
    def input_dim(self):
        return self.arg.input_dim

    @property
    def output_dim(self):
        return self.M.shape[0]

    def children(self):
        return (self.arg,)

    def _eval(self, X):
        return _congruence(self.M, self.arg._eval(X))

    def _ddir(self, X, H):
        return _congruence(self.M, self.arg._ddir(X, H))


@dataclass(frozen=True, eq=False)
class Hadamard(ConvexMatrixExpr):
    """``G_M(x) = M * F(x)`` (entrywise) for PSD ``M``.

    ``equality_case`` is set when every entry of ``M`` is nonzero and the
    entrywise reciprocal of ``M`` is PSD.
    """

    M: np.ndarray
    arg: ConvexMatrixExpr
    equality_case: bool

    @property
    def input_dim(self):
        return self.arg.input_dim

    @property
    def output_dim(self):
        return self.M.shape[0]

    def children(self):
        return (self.arg,)

    def _eval(self, X):
        return self.M * self.arg._eval(X)

    def _ddir(self, X, H):
        return self.M * self.arg._ddir(X, H)


@dataclass(frozen=True, eq=False)
class Precompose(ConvexMatrixExpr):
    """``G(y) = F(A y + b)`` with ``A`` of shape ``(d, m)``."""

    arg: ConvexMatrixExpr
    A: np.ndarray
    b: np.ndarray

    @property
    def input_dim(self):
        return self.A.shape[1]

    @property
    def output_dim(self):
        return self.arg.output_dim

    def children(self):
        return (self.arg,)

    def _eval(self, X):
        return self.arg._eval(X @ self.A.T + self.b)

    def _ddir(self, X, H):
        return self.arg._ddir(X @ self.A.T + self.b, H @ self.A.T)


def _block_diag(S1, S2):
    n, l1, l2 = S1.shape[0], S1.shape[1], S2.shape[1]
    out = np.zeros((n, l1 + l2, l1 + l2))
    out[:, :l1, :l1] = S1
    out[:, l1:, l1:] = S2
    return out


@dataclass(frozen=True, eq=False)
class BlockDiag(ConvexMatrixExpr):
    first: ConvexMatrixExpr
    second: ConvexMatrixExpr

    @property
    def input_dim(self):
        return self.first.input_dim

    @property
    def output_dim(self):
        return self.first.output_dim + self.second.output_dim

    def children(self):
        return (self.first, self.second)

    def _eval(self, X):
        return _block_diag(self.first._eval(X), self.second._eval(X))

    def _ddir(self, X, H):
        return _block_diag(self.first._ddir(X, H), self.second._ddir(X, H))


def _double(S):
    top = np.concatenate([S, -S], axis=2)
    return np.concatenate([top, -top], axis=1)


@dataclass(frozen=True, eq=False)
class Double(ConvexMatrixExpr):
    """``G(x) = [[F(x), -F(x)], [-F(x), F(x)]]``."""

    arg: ConvexMatrixExpr

    @property
    def input_dim(self):
        return self.arg.input_dim

    @property
    def output_dim(self):
        return 2 * self.arg.output_dim

    def children(self):
        return (self.arg,)

    def _eval(self, X):
        return _double(self.arg._eval(X))

    def _ddir(self, X, H):
        return _double(self.arg._ddir(X, H))


# --------------------------------------------------------------------------
# constructors


def mk_const(A0, input_dim):
    input_dim = int(input_dim)
    _check_input_dim(input_dim)
    return Const(_sym_array(A0, "A0"), input_dim)


def mk_affine(V, A0=None):
    """Affine map ``x -> sum_i x_i V[i] + A0``.

    ``V`` is a sequence of symmetric matrices (or a ``MatTuple``); ``A0``
    defaults to zero.
    """
    mats = [as_symmat(v) for v in V]
    if not mats:
        raise DimensionMismatch("an affine map needs at least one coefficient matrix")
    ell = mats[0].dim
    if A0 is None:
        A0 = SymMat.zeros(ell)
    A0 = as_symmat(A0)
    if any(m.dim != ell for m in mats) or A0.dim != ell:
        raise DimensionMismatch("coefficient matrices and A0 must share one dimension")
    _check_input_dim(len(mats))
    return Affine(_frozen([m.to_array() for m in mats], 3, "V"), _frozen(A0.to_array(), 2, "A0"))


def mk_lift(f, P):
    """Lift a convex scalar atom by a PSD matrix: ``x -> f(x) * P``."""
    if not isinstance(f, ScalarAtom):
        raise TypeError("f must be a ScalarAtom")
    P = as_symmat(P)
    verdict = psd_verdict(P)
    if not verdict:
        raise NotPsd("P", verdict)
    return Lift(f, _frozen(P.to_array(), 2, "P"))


def mk_sum(F1, F2):
    if F1.input_dim != F2.input_dim or F1.output_dim != F2.output_dim:
        raise DimensionMismatch(
            f"summands have shapes (d={F1.input_dim}, l={F1.output_dim}) "
            f"and (d={F2.input_dim}, l={F2.output_dim})"
        )
    return Sum(F1, F2)


def mk_scale(alpha, F):
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise NonFinite("alpha must be finite")
    if alpha < 0:
        raise NegativeScale(f"scale factor must be nonnegative, got {alpha}")
    return Scale(alpha, F)


def mk_congruence(M, F):
    M = _frozen(np.atleast_2d(M), 2, "M")
    if M.shape[1] != F.output_dim:
        raise DimensionMismatch(
            f"M has {M.shape[1]} columns but F has output dimension {F.output_dim}"
        )
    _check_output_dim(M.shape[0])
    invertible = M.shape[0] == M.shape[1] and abs(np.linalg.det(M)) > 1e-12
    return Congruence(M, F, bool(invertible))


def mk_hadamard(M, F):
    M = as_symmat(M)
    if M.dim != F.output_dim:
        raise DimensionMismatch(f"M has dimension {M.dim}, F has output dimension {F.output_dim}")
    verdict = psd_verdict(M)
    if not verdict:
        raise NotPsd("M", verdict)
    arr = M.to_array()
    equality = bool(np.all(arr != 0.0)) and bool(psd_verdict(1.0 / arr))
    return Hadamard(_frozen(arr, 2, "M"), F, equality)


def mk_precompose(F, A, b=None):
    A = _frozen(np.atleast_2d(A), 2, "A")
    if A.shape[0] != F.input_dim:
        raise DimensionMismatch(f"A has {A.shape[0]} rows but F has input dimension {F.input_dim}")
    _check_input_dim(A.shape[1])
    b = np.zeros(A.shape[0]) if b is None else b
    b = _frozen(np.atleast_1d(b), 1, "b")
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatch("b must have one entry per row of A")
    return Precompose(F, A, b)


def mk_block_diag(F1, F2):
    if F1.input_dim != F2.input_dim:
        raise DimensionMismatch(
            f"blocks have input dimensions {F1.input_dim} and {F2.input_dim}"
        )
    _check_output_dim(F1.output_dim + F2.output_dim)
    return BlockDiag(F1, F2)


def mk_diag(atoms):
    """``diag(f_1(x), ..., f_l(x))`` as nested 1x1 block diagonals."""
    atoms = list(atoms)
    if not atoms:
        raise DimensionMismatch("need at least one diagonal entry")
    out = mk_lift(atoms[0], [[1.0]])
    for f in atoms[1:]:
        out = mk_block_diag(out, mk_lift(f, [[1.0]]))
    return out


def mk_double(F):
    _check_output_dim(2 * F.output_dim)
    return Double(F)


# --------------------------------------------------------------------------
# evaluation


def _point(F, x, name="x"):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != F.input_dim:
        raise DimensionMismatch(f"{name} must have length {F.input_dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"{name} must be finite")
    return x


def _points(F, X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and F.input_dim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] != F.input_dim:
        raise DimensionMismatch(f"{name} must have shape (n, {F.input_dim}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFinite(f"{name} must be finite")
    return X


def evaluate_batch(F, X):
    """Evaluate at every row of ``X``; returns an ``(n, l, l)`` array."""
    return F._eval(_points(F, X))


def dir_deriv_batch(F, X, H):
    """Directional derivatives ``F'(x_k; h_k)`` for paired rows of ``X`` and ``H``."""
    X, H = _points(F, X), _points(F, H, "H")
    if X.shape != H.shape:
        raise DimensionMismatch("X and H must have the same shape")
    return F._ddir(X, H)


def evaluate(F, x):
    x = _point(F, x)
    return SymMat.from_array(F._eval(x[None, :])[0], atol=None)


def scalarize_eval(F, z, x):
    """Quadratic form ``<z, F(x) z>``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (F.output_dim,):
        raise DimensionMismatch(f"z must have length {F.output_dim}, got shape {z.shape}")
    x = _point(F, x)
    return float(z @ F._eval(x[None, :])[0] @ z)


def dir_deriv(F, x, h):
    """One-sided directional derivative ``lim_{t->0+} (F(x + t h) - F(x)) / t``.

    Computed exactly from the structure of ``F``.
    """
    x, h = _point(F, x), _point(F, h, "h")
    if not np.any(h):
        raise ZeroDirection("direction must be nonzero")
    return SymMat.from_array(F._ddir(x[None, :], h[None, :])[0], atol=None)


@dataclass(frozen=True)
class Interval1D:
    """Pair of one-sided derivatives ``(F'_-(x), F'_+(x))`` of a univariate F.

    For a convex ``F`` the subdifferential at ``x`` is exactly the Loewner
    interval ``{V : left <= V <= right}``.
    """

    left: SymMat
    right: SymMat

    def contains(self, V, tol=None):
        """Return ``(lower, upper)`` verdicts for ``left <= V`` and ``V <= right``."""
        kw = {} if tol is None else {"tol": tol}
        V = as_symmat(V)
        return loewner_leq(self.left, V, **kw), loewner_leq(V, self.right, **kw)

    def __contains__(self, V):
        lower, upper = self.contains(V)
        return lower.is_psd and upper.is_psd


def one_sided_1d(F, x):
    """``Interval1D(F'_-(x), F'_+(x))`` for univariate ``F``, with ``F'_-(x) = -F'(x; -1)``."""
    if F.input_dim != 1:
        raise NotUnivariate(f"expected a univariate function, got input dimension {F.input_dim}")
    x = _point(F, x)
    X = np.vstack([x, x])
    D = F._ddir(X, np.array([[1.0], [-1.0]]))
    right = SymMat.from_array(D[0], atol=None)
    # 0.0 - d instead of -d: no -0.0 entries
    left = SymMat.from_array(0.0 - D[1], atol=None)
    return Interval1D(left=left, right=right)


def walk(F):
    """Yield every node of the tree in pre-order."""
    yield F
    for child in F.children():
        yield from walk(child)
