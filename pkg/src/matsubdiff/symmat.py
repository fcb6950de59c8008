"""Symmetric matrices, eigendecomposition and Loewner-order tests.

All order tests use a relative tolerance: a symmetric matrix ``A`` counts as
positive semidefinite when ``lambda_min(A) >= -tol * (1 + ||A||_F)``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DimensionMismatch, DimensionTooLarge, NonFinite, PreconditionViolated

DEFAULT_TOL = 1e-9
MAX_DIM = 32


class SymMat:
    """Real symmetric matrix stored as its upper triangle (row-major).

    Instances are immutable. Use :meth:`from_array` to build one from a dense
    square array and :meth:`to_array` (or ``np.asarray``) to get it back.
    """

    __slots__ = ("_dim", "_entries")

    def __init__(self, dim, entries):
        dim = int(dim)
        if dim < 1:
            raise DimensionMismatch(f"dimension must be >= 1, got {dim}")
        if dim > MAX_DIM:
            raise DimensionTooLarge(f"dimension {dim} exceeds the limit {MAX_DIM}")
        entries = np.array(entries, dtype=float).ravel()
        if entries.size != dim * (dim + 1) // 2:
            raise DimensionMismatch(
                f"expected {dim * (dim + 1) // 2} entries for dim {dim}, got {entries.size}"
            )
        if not np.all(np.isfinite(entries)):
            raise NonFinite("matrix entries must be finite")
        entries.flags.writeable = False
        self._dim = dim
        self._entries = entries

    @classmethod
    def from_array(cls, a, atol=1e-10):
        """Build from a dense square array.

        The lower triangle must agree with the upper one to within
        ``atol * (1 + max|a|)``; the upper triangle is what gets stored.
        """
        a = np.asarray(a, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFinite("matrix entries must be finite")
        if atol is not None:
            scale = 1.0 + np.max(np.abs(a), initial=0.0)
            if np.max(np.abs(a - a.T), initial=0.0) > atol * scale:
                raise ValueError("matrix is not symmetric")
        iu = np.triu_indices(a.shape[0])
        return cls(a.shape[0], a[iu])

    @classmethod
    def zeros(cls, dim):
        return cls(dim, np.zeros(dim * (dim + 1) // 2))

    @classmethod
    def identity(cls, dim):
        return cls.from_array(np.eye(dim))

    @property
    def dim(self):
        return self._dim

    @property
    def entries(self):
        return self._entries

    def to_array(self):
        n = self._dim
        out = np.zeros((n, n))
        iu = np.triu_indices(n)
        out[iu] = self._entries
        out.T[iu] = self._entries
        return out

    def __array__(self, dtype=None, copy=None):
        out = self.to_array()
        return out if dtype is None else out.astype(dtype)

    def tolist(self):
        return self.to_array().tolist()

    def norm(self):
        """Frobenius norm."""
        return float(np.linalg.norm(self.to_array()))

    def _check(self, other):
        other = as_symmat(other)
        if other.dim != self._dim:
            raise DimensionMismatch(f"dimensions differ: {self._dim} vs {other.dim}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return SymMat(self._dim, self._entries + other._entries)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return SymMat(self._dim, self._entries - other._entries)

    def __rsub__(self, other):
        return self._check(other) - self

    def __neg__(self):
        return SymMat(self._dim, -self._entries)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SymMat(self._dim, float(scalar) * self._entries)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SymMat(self._dim, self._entries / float(scalar))

    def __eq__(self, other):
        if not isinstance(other, SymMat):
            return NotImplemented
        return self._dim == other._dim and np.array_equal(self._entries, other._entries)

    __hash__ = None

    def __repr__(self):
        return f"SymMat({self.to_array().tolist()!r})"


def as_symmat(a):
    if isinstance(a, SymMat):
        return a
    return SymMat.from_array(a)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in nondecreasing order with an orthonormal eigenbasis.

    ``basis[:, i]`` is the eigenvector for ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray


class PsdOutcome(Enum):
    PSD = "PSD"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class PsdVerdict:
    outcome: PsdOutcome
    min_eigenvalue: float
    witness: np.ndarray | None
    tolerance_used: float

    @property
    def is_psd(self):
        return self.outcome is PsdOutcome.PSD

    def __bool__(self):
        return self.is_psd


def frobenius(a, b):
    """Inner product ``trace(A B)``."""
    a, b = as_symmat(a), as_symmat(b)
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    return float(np.sum(a.to_array() * b.to_array()))


def _fix_signs(vectors):
    # Make the largest-magnitude component of each column positive.
    idx = np.argmax(np.abs(vectors), axis=-2)
    pick = np.take_along_axis(vectors, idx[..., None, :], axis=-2)
    return vectors * np.where(pick < 0, -1.0, 1.0)


def eigen_sym(a):
    """Symmetric eigendecomposition with a deterministic sign convention."""
    a = as_symmat(a)
    w, q = np.linalg.eigh(a.to_array())
    return Spectrum(eigenvalues=w, basis=_fix_signs(q))


def effective_tol(a, tol=DEFAULT_TOL):
    """Absolute eigenvalue slack ``tol * (1 + ||A||_F)``; works on stacks."""
    return tol * (1.0 + np.linalg.norm(np.asarray(a), axis=(-2, -1)))


def min_eig(stack):
    """Smallest eigenvalue and its unit eigenvector for a stack of symmetric arrays."""
    w, q = np.linalg.eigh(stack)
    return w[..., 0], _fix_signs(q)[..., :, 0]


def psd_verdict(a, tol=DEFAULT_TOL):
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = as_symmat(a)
    arr = a.to_array()
    lam, vec = min_eig(arr)
    tau = float(effective_tol(arr, tol))
    if lam >= -tau:
        return PsdVerdict(PsdOutcome.PSD, float(lam), None, tau)
    return PsdVerdict(PsdOutcome.INDEFINITE, float(lam), vec, tau)


def loewner_leq(a, b, tol=DEFAULT_TOL):
    """Test ``A <= B`` in the Loewner order, i.e. ``B - A`` is PSD."""
    a, b = as_symmat(a), as_symmat(b)
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    return psd_verdict(b - a, tol)


def order_ball_bound_check(C, X1, X2, Y, Z, tol=DEFAULT_TOL):
    """Check ``||X||_F <= 3C`` for ``X = X1 + Y = X2 + Z``.

    Preconditions: ``||X1||_F, ||X2||_F <= C``, ``Y`` PSD, ``Z`` NSD and the
    two representations of ``X`` agree. Any violated precondition raises
    :class:`PreconditionViolated` naming all failures.
    """
    X1, X2, Y, Z = (as_symmat(m) for m in (X1, X2, Y, Z))
    if len({m.dim for m in (X1, X2, Y, Z)}) != 1:
        raise DimensionMismatch("all matrices must share one dimension")
    failed = []
    if C < 0:
        failed.append("C >= 0")
    slack = 1e-12 * (1.0 + abs(C))
    if X1.norm() > C + slack:
        failed.append("||X1||_F <= C")
    if X2.norm() > C + slack:
        failed.append("||X2||_F <= C")
    if not psd_verdict(Y, tol):
        failed.append("Y PSD")
    if not psd_verdict(-Z, tol):
        failed.append("Z NSD")
    lhs, rhs = X1 + Y, X2 + Z
    if (lhs - rhs).norm() > 1e-9 * (1.0 + lhs.norm()):
        failed.append("X1 + Y == X2 + Z")
    if failed:
        raise PreconditionViolated(failed)
    return lhs.norm() <= 3.0 * C + 1e-9


def _random_sym(rng, dim):
    g = rng.standard_normal((dim, dim))
    return (g + g.T) / 2.0


def _ball_point(rng, dim, C):
    s = _random_sym(rng, dim)
    k = dim * (dim + 1) // 2
    return s * (C * rng.random() ** (1.0 / k) / np.linalg.norm(s))


def sample_order_ball(rng, C, dim, max_tries=10_000):
    """Draw a valid ``(X1, X2, Y, Z)`` for :func:`order_ball_bound_check`.

    ``X1`` is drawn from the Frobenius ball, ``X2 = X1 + P`` with ``P`` PSD is
    rejected until it lands in the ball too, then ``Y`` and ``Z`` split
    ``X2 - X1`` into a PSD and an NSD part.
    """
    for _ in range(max_tries):
        x1 = _ball_point(rng, dim, C)
        g = rng.standard_normal((dim, dim)) * rng.random() * C
        x2 = x1 + g @ g.T / dim
        if np.linalg.norm(x2) > C:
            continue
        d = x2 - x1
        w, q = np.linalg.eigh(d)
        root = (q * np.sqrt(np.clip(w, 0.0, None))) @ q.T
        u, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        r = (u * rng.random(dim)) @ u.T
        z = -root @ r @ root
        z = (z + z.T) / 2.0
        y = x2 + z - x1
        y = (y + y.T) / 2.0
        mats = tuple(SymMat.from_array(m, atol=None) for m in (x1, x2, y, z))
        # Reject draws where rounding pushed a cone member across the boundary.
        if psd_verdict(mats[2]) and psd_verdict(-mats[3]):
            return mats
    raise RuntimeError("rejection sampler exhausted its tries")
