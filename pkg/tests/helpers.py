"""Random expression generation and structural oracles shared by the tests."""

import numpy as np

from matsubdiff import expr as E


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    G = rng.integers(-2, 3, size=(n, rank)).astype(float)
    return G @ G.T / max(rank, 1)


def random_sym(rng, n):
    A = rng.integers(-3, 4, size=(n, n)).astype(float)
    return (A + A.T) / 2


def random_atom(rng, d):
    kind = rng.integers(3)
    if kind == 0:
        return E.AbsCoord(int(rng.integers(d)), d)
    if kind == 1:
        k = int(rng.integers(1, 4))
        slopes = rng.integers(-2, 3, size=(k, d)).astype(float)
        offsets = rng.integers(-2, 3, size=k) / 2.0
        return E.MaxAffine(slopes, offsets)
    return E.AffineScalar(rng.integers(-2, 3, size=d).astype(float), float(rng.integers(-2, 3)))


def random_leaf(rng, d, ell):
    kind = rng.integers(4)
    if kind == 0:
        return E.mk_affine([random_sym(rng, ell) for _ in range(d)], random_sym(rng, ell))
    if kind == 1:
        return E.mk_const(random_sym(rng, ell), d)
    return E.mk_lift(random_atom(rng, d), random_psd(rng, ell, rank=int(rng.integers(1, ell + 1))))


def random_expression(rng, d, ell, depth):
    """Random well-formed expression with input dim ``d`` and output dim ``ell``."""
    if depth == 0 or rng.random() < 0.25:
        return random_leaf(rng, d, ell)
    ops = ["sum", "sum", "scale", "congruence", "hadamard", "precompose"]
    if ell >= 2:
        ops.append("blockdiag")
    if ell % 2 == 0:
        ops.append("double")
    op = ops[rng.integers(len(ops))]
    sub = depth - 1
    if op == "sum":
        return E.mk_sum(random_expression(rng, d, ell, sub), random_expression(rng, d, ell, sub))
    if op == "scale":
        return E.mk_scale(float(rng.choice([0.0, 0.5, 1.0, 2.0])), random_expression(rng, d, ell, sub))
    if op == "congruence":
        inner = int(rng.integers(1, 5))
        M = rng.integers(-2, 3, size=(ell, inner)).astype(float)
        return E.mk_congruence(M, random_expression(rng, d, inner, sub))
    if op == "hadamard":
        return E.mk_hadamard(random_psd(rng, ell), random_expression(rng, d, ell, sub))
    if op == "precompose":
        inner = int(rng.integers(1, 4))
        A = rng.integers(-2, 3, size=(inner, d)).astype(float)
        b = rng.integers(-2, 3, size=inner) / 2.0
        return E.mk_precompose(random_expression(rng, inner, ell, sub), A, b)
    if op == "blockdiag":
        l1 = int(rng.integers(1, ell))
        return E.mk_block_diag(random_expression(rng, d, l1, sub),
                               random_expression(rng, d, ell - l1, sub))
    return E.mk_double(random_expression(rng, d, ell // 2, sub))


def random_case(rng, max_d=3, max_ell=4, max_depth=4):
    d = int(rng.integers(1, max_d + 1))
    ell = int(rng.integers(1, max_ell + 1))
    return random_expression(rng, d, ell, int(rng.integers(0, max_depth + 1)))


def _atom_kink_distance(atom, A, b, x):
    u = A @ x + b
    if isinstance(atom, E.AbsCoord):
        g = np.linalg.norm(A[atom.index])
        return np.inf if g == 0 else abs(u[atom.index]) / g
    if isinstance(atom, E.MaxAffine):
        v = atom.slopes @ u + atom.offsets
        top = int(np.argmax(v))
        best = np.inf
        for k in range(v.size):
            if k == top:
                continue
            g = np.linalg.norm((atom.slopes[top] - atom.slopes[k]) @ A)
            if g > 0:
                best = min(best, (v[top] - v[k]) / g)
        return best
    return np.inf


def kink_distance(F, x, A=None, b=None):
    """Lower bound on the distance from ``x`` to the nonsmooth set of ``F``.

    Tracks the affine substitution reaching each atom through precompose
    nodes and measures the distance to the hyperplane where the atom's
    active piece could change.
    """
    x = np.asarray(x, dtype=float)
    if A is None:
        A, b = np.eye(x.size), np.zeros(x.size)
    if isinstance(F, E.Lift):
        return _atom_kink_distance(F.atom, A, b, x)
    if isinstance(F, E.Precompose):
        return kink_distance(F.arg, x, F.A @ A, F.A @ b + F.b)
    return min((kink_distance(c, x, A, b) for c in F.children()), default=np.inf)


def univariate_case(rng, max_ell=4, max_depth=4):
    ell = int(rng.integers(1, max_ell + 1))
    return random_expression(rng, 1, ell, int(rng.integers(0, max_depth + 1)))


def kinked_univariate_case(rng, max_ell=4, max_depth=4, max_tries=10_000):
    """Univariate ``F`` and point ``x`` with ``F'_+(x) != F'_-(x)``.

    Random expressions are smooth at most points, so this redraws until the
    one-sided derivatives at ``x`` actually differ.
    """
    for _ in range(max_tries):
        F = univariate_case(rng, max_ell, max_depth)
        x = np.array([rng.integers(-2, 3) / 2.0])
        iv = E.one_sided_1d(F, x)
        if np.linalg.norm(np.asarray(iv.right) - np.asarray(iv.left)) > 1e-10:
            return F, x
    raise RuntimeError("no kinked case found")
