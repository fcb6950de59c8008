"""Subgradients of matrix-convex expressions.

:func:`subgradient` walks an expression and combines leaf subgradients with
the inclusion rules of the subdifferential calculus (sums, nonnegative
scaling, congruence, Hadamard products with PSD masks, affine
precomposition, block diagonals and the ``[[F, -F], [-F, F]]`` doubling), so
the returned tuple is always a genuine subgradient. For univariate functions
:func:`subdiff_interval_1d` describes the whole subdifferential, and
:func:`clarke_sample` collects derivatives at nearby smooth points.
"""

from dataclasses import dataclass, field
from functools import singledispatch

import numpy as np

from .exceptions import DimensionMismatch, NoSmoothSamples, NotDifferentiable, NotUnivariate
from .expr import (
    TIE_TOL,
    AbsCoord,
    Affine,
    AffineScalar,
    BlockDiag,
    Congruence,
    Const,
    Double,
    Hadamard,
    Lift,
    MaxAffine,
    Precompose,
    Scale,
    Sum,
    _block_diag,
    _congruence,
    _double,
    _point,
    one_sided_1d,
)
from .symmat import SymMat, as_symmat

SMOOTH_TOL = 1e-8


class MatTuple:
    """Tuple ``(V_1, ..., V_d)`` of symmetric matrices of equal size.

    Represents the linear operator ``y -> sum_i y_i V_i`` from ``R^d`` to
    ``S^l``. Backed by a read-only ``(d, l, l)`` array.
    """

    __slots__ = ("_array",)

    def __init__(self, mats):
        if isinstance(mats, np.ndarray) and mats.ndim == 3:
            arr = np.array(mats, dtype=float)
            if arr.shape[1] != arr.shape[2]:
                raise DimensionMismatch(f"expected (d, l, l), got {arr.shape}")
            arr = (arr + np.swapaxes(arr, 1, 2)) / 2.0
        else:
            syms = [as_symmat(m) for m in mats]
            if not syms:
                raise DimensionMismatch("a MatTuple needs at least one matrix")
            if len({s.dim for s in syms}) != 1:
                raise DimensionMismatch("all matrices in a MatTuple must share one dimension")
            arr = np.array([s.to_array() for s in syms])
        if arr.shape[0] == 0:
            raise DimensionMismatch("a MatTuple needs at least one matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("MatTuple entries must be finite")
        arr.flags.writeable = False
        self._array = arr

    @property
    def array(self):
        return self._array

    @property
    def d(self):
        return self._array.shape[0]

    @property
    def ell(self):
        return self._array.shape[1]

    def __len__(self):
        return self.d

    def __getitem__(self, i):
        return SymMat.from_array(self._array[i], atol=None)

    def __iter__(self):
        return (self[i] for i in range(self.d))

    def apply(self, y):
        """``sum_i y_i V_i``."""
        return SymMat.from_array(np.tensordot(np.asarray(y, float), self._array, axes=1), atol=None)

    def tolist(self):
        return self._array.tolist()

    def __eq__(self, other):
        if not isinstance(other, MatTuple):
            return NotImplemented
        return np.array_equal(self._array, other._array)

    __hash__ = None

    def __repr__(self):
        return f"MatTuple({self.tolist()!r})"


@dataclass(frozen=True)
class Provenance:
    rule: str
    children: tuple = field(default=())

    def to_dict(self):
        out = {"rule": self.rule}
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out


@dataclass(frozen=True)
class SubgradientCert:
    value: MatTuple
    provenance: Provenance


# --------------------------------------------------------------------------
# scalar atoms: one element of the subdifferential, with fixed tie-breaking


@singledispatch
def atom_subgradient(atom, x):
    raise TypeError(f"no subgradient rule for {type(atom).__name__}")


@atom_subgradient.register
def _(atom: AffineScalar, x):
    return atom.a.copy()


@atom_subgradient.register
def _(atom: AbsCoord, x):
    g = np.zeros(atom.input_dim)
    xi = x[atom.index]
    # Zero is the chosen element of [-1, 1] at the kink.
    g[atom.index] = 0.0 if abs(xi) <= TIE_TOL else np.sign(xi)
    return g


@atom_subgradient.register
def _(atom: MaxAffine, x):
    active = atom.active(x[None, :])[0]
    return atom.slopes[np.flatnonzero(active)[0]].copy()


# --------------------------------------------------------------------------
# matrix expressions: returns ((d, l, l) array, Provenance)


@singledispatch
def _rule(F, x):
    raise TypeError(f"no subgradient rule for {type(F).__name__}")


@_rule.register
def _(F: Const, x):
    return np.zeros((F.input_dim,) + F.value.shape), Provenance("affine-exact")


@_rule.register
def _(F: Affine, x):
    return F.V.copy(), Provenance("affine-exact")


@_rule.register
def _(F: Lift, x):
    g = atom_subgradient(F.atom, x)
    return g[:, None, None] * F.P, Provenance("lift")


@_rule.register
def _(F: Sum, x):
    V1, p1 = _rule(F.left, x)
    V2, p2 = _rule(F.right, x)
    return V1 + V2, Provenance("sum-rule", (p1, p2))


@_rule.register
def _(F: Scale, x):
    V, p = _rule(F.arg, x)
    return F.alpha * V, Provenance("scale", (p,))


@_rule.register
def _(F: Congruence, x):
    V, p = _rule(F.arg, x)
    return _congruence(F.M, V), Provenance("congruence", (p,))


@_rule.register
def _(F: Hadamard, x):
    V, p = _rule(F.arg, x)
    return F.M * V, Provenance("hadamard", (p,))


@_rule.register
def _(F: Precompose, x):
    V, p = _rule(F.arg, F.A @ x + F.b)
    # W_j = sum_i A_ij V_i
    return np.tensordot(F.A.T, V, axes=(1, 0)), Provenance("precompose", (p,))


@_rule.register
def _(F: BlockDiag, x):
    V1, p1 = _rule(F.first, x)
    V2, p2 = _rule(F.second, x)
    return _block_diag(V1, V2), Provenance("block-diag", (p1, p2))


@_rule.register
def _(F: Double, x):
    V, p = _rule(F.arg, x)
    return _double(V), Provenance("double", (p,))


def subgradient(F, x, policy="rules"):
    """A certified element of the subdifferential of ``F`` at ``x``.

    With ``policy="rules"`` (default) the calculus rules are applied node by
    node. ``policy="right-derivative"`` is available for univariate ``F`` and
    returns ``F'_+(x)``, which always belongs to the subdifferential.
    """
    x = _point(F, x)
    if policy == "right-derivative":
        if F.input_dim != 1:
            raise NotUnivariate("the right-derivative policy needs a univariate function")
        right = one_sided_1d(F, x).right
        return SubgradientCert(MatTuple([right]), Provenance("right-derivative-1d"))
    if policy != "rules":
        raise ValueError(f"unknown policy {policy!r}")
    V, prov = _rule(F, x)
    return SubgradientCert(MatTuple(V), prov)


def subdiff_interval_1d(F, x):
    """Exact subdifferential of a univariate ``F`` as a Loewner interval."""
    if F.input_dim != 1:
        raise NotUnivariate(f"expected a univariate function, got input dimension {F.input_dim}")
    return one_sided_1d(F, x)


def _partials(F, X):
    """Right and left partial derivatives at each row of ``X``.

    Returns ``(plus, minus, gap)`` where ``plus[k, i] = F'(x_k; e_i)``,
    ``minus[k, i] = -F'(x_k; -e_i)`` and ``gap[k, i]`` is the Frobenius norm
    of their difference.
    """
    n, d = X.shape
    E = np.eye(d)
    Xr = np.repeat(X, 2 * d, axis=0)
    H = np.tile(np.vstack([E, -E]), (n, 1))
    D = F._ddir(Xr, H).reshape(n, 2 * d, F.output_dim, F.output_dim)
    plus, minus = D[:, :d], -D[:, d:]
    gap = np.linalg.norm(plus - minus, axis=(-2, -1))
    return plus, minus, gap


def gradient_if_smooth(F, x, tol=SMOOTH_TOL):
    """Derivative ``(dF/dx_1, ..., dF/dx_d)`` when ``F`` is differentiable at ``x``.

    Raises :class:`NotDifferentiable` naming the first (one-based) coordinate
    whose left and right partial derivatives differ by more than ``tol``.
    """
    x = _point(F, x)
    plus, _, gap = _partials(F, x[None, :])
    bad = np.flatnonzero(gap[0] > tol)
    if bad.size:
        raise NotDifferentiable(int(bad[0]) + 1, float(gap[0, bad[0]]))
    return MatTuple(plus[0])


def make_rng(seed):
    """Counter-based generator; identical seeds replay identical streams."""
    return np.random.Generator(np.random.Philox(seed))


def sample_ball(rng, center, radius, n):
    """``n`` points uniformly distributed in the Euclidean ball."""
    d = center.shape[0]
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return center + g * r[:, None]


def clarke_sample(F, x, n, radius, seed, tol=SMOOTH_TOL):
    """Derivatives of ``F`` at random smooth points near ``x``.

    Draws ``n`` points uniformly from the ball of the given radius around
    ``x`` and returns the derivative at each point where ``F`` is
    differentiable. These approximate the generators of the Clarke
    subdifferential; their convex hull is not formed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    x = _point(F, x)
    rng = make_rng(seed)
    X = sample_ball(rng, x, radius, int(n))
    plus, _, gap = _partials(F, X)
    smooth = np.all(gap <= tol, axis=1)
    if not smooth.any():
        raise NoSmoothSamples(f"none of the {n} sampled points is a point of differentiability")
    return [MatTuple(plus[k]) for k in np.flatnonzero(smooth)]
