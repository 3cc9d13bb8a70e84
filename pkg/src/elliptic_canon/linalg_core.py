"""Small dense linear algebra: 2x2 and 4x4 real matrices, quartic roots.

Matrices are plain ``numpy`` arrays.  A ``Mat2`` is a ``(2, 2)`` float array,
a ``Mat4Sym`` a symmetric ``(4, 4)`` float array, and complex scalars are
Python ``complex`` values.
"""
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DegenerateLeadingCoefficient

__all__ = [
    "JordanCase",
    "JordanForm",
    "as_mat2",
    "det2",
    "inv2",
    "eig_sym",
    "fold_upper",
    "jordan_2x2",
    "poly_eval",
    "refine_double_root",
    "solve_quartic",
]


def as_mat2(m):
    a = np.array(m, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def inv2(m):
    d = det2(m)
    if d == 0.0:
        raise np.linalg.LinAlgError("singular 2x2 matrix")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / d


def fold_upper(z):
    """Return the upper half-plane representative of ``{z, conj(z)}``."""
    z = complex(z)
    return z.conjugate() if z.imag < 0 else z


def poly_eval(coeffs, x):
    """Horner evaluation, ``coeffs`` ordered from the leading term down."""
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _polish(coeffs, root, steps=3):
    # Newton steps kept only while they reduce |p|; harmless near clusters.
    dcoeffs = [c * k for c, k in zip(coeffs[:-1], range(len(coeffs) - 1, 0, -1))]
    best, best_res = root, abs(poly_eval(coeffs, root))
    for _ in range(steps):
        d = poly_eval(dcoeffs, best)
        if d == 0:
            break
        cand = best - poly_eval(coeffs, best) / d
        res = abs(poly_eval(coeffs, cand))
        if not res < best_res:
            break
        best, best_res = cand, res
    return best


def refine_double_root(coeffs, z, steps=8):
    """Newton on ``p'`` from ``z``: a double root of ``p`` is a simple root of
    ``p'``, so the centre of a two-root cluster is recovered to full accuracy."""
    n = len(coeffs) - 1
    d1 = [c * (n - k) for k, c in enumerate(coeffs[:-1])]
    d2 = [c * (n - 1 - k) for k, c in enumerate(d1[:-1])]
    z = complex(z)
    for _ in range(steps):
        den = poly_eval(d2, z)
        if den == 0:
            break
        step = poly_eval(d1, z) / den
        z -= step
        if abs(step) <= 1e-16 * (1.0 + abs(z)):
            break
    return z


def solve_quartic(c4, c3, c2, c1, c0):
    """All four complex roots of ``c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0``.

    Roots are the eigenvalues of the 4x4 companion matrix (LAPACK QR
    iteration), followed by a guarded Newton polish.  The returned list is
    sorted by (imaginary part, real part) and is closed under conjugation
    up to rounding.
    """
    coeffs = [float(c) for c in (c4, c3, c2, c1, c0)]
    scale = max(abs(c) for c in coeffs)
    if scale == 0.0 or abs(coeffs[0]) <= 1e-14 * scale:
        raise DegenerateLeadingCoefficient(f"leading coefficient {c4!r} is negligible")
    monic = [c / coeffs[0] for c in coeffs]
    comp = np.zeros((4, 4))
    comp[0, :] = [-c for c in monic[1:]]
    comp[1:, :3] = np.eye(3)
    roots = [_polish(monic, complex(r)) for r in np.linalg.eigvals(comp)]
    # Snap numerically real roots onto the axis and enforce conjugate pairs.
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-14 * (1.0 + abs(r)):
            r = complex(r.real, 0.0)
        out.append(r)
    return sorted(out, key=lambda z: (z.imag, z.real))


def eig_sym(m, tol=1e-15, max_sweeps=100):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Returns an ascending ``numpy`` array.
    """
    a = np.array(m, dtype=float)
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


class JordanCase(str, Enum):
    DISTINCT_REAL = "DistinctReal"
    REPEATED_REAL_BLOCK = "RepeatedRealBlock"
    REPEATED_REAL_DIAGONAL = "RepeatedRealDiagonal"
    COMPLEX_PAIR = "ComplexPair"


class JordanForm(NamedTuple):
    case: JordanCase
    J: np.ndarray
    P: np.ndarray


def _kernel_vector(n):
    # Null vector of a rank-one 2x2 matrix, taken from its larger row.
    r = n[0] if np.hypot(*n[0]) >= np.hypot(*n[1]) else n[1]
    v = np.array([-r[1], r[0]])
    nv = np.hypot(*v)
    return v / nv if nv > 0 else np.array([1.0, 0.0])


def jordan_2x2(m, tol=1e-10):
    """Real Jordan form ``M = P J P^-1`` of a real 2x2 matrix.

    ``DistinctReal`` returns ``J = diag(lam, mu)`` with ``|lam| <= |mu|``
    (for ``lam == -mu`` the positive one first).  ``RepeatedRealDiagonal``
    is reported when ``M`` is within ``tol`` of a scalar matrix, and an
    eigenvalue gap below ``tol * |M|`` that is not scalar counts as a
    ``RepeatedRealBlock``.
    """
    m = as_mat2(m)
    norm = np.linalg.norm(m)
    half_tr = 0.5 * (m[0, 0] + m[1, 1])
    if norm == 0.0 or np.linalg.norm(m - half_tr * np.eye(2)) <= tol * norm:
        return JordanForm(JordanCase.REPEATED_REAL_DIAGONAL, half_tr * np.eye(2), np.eye(2))

    half_diff = 0.5 * (m[0, 0] - m[1, 1])
    disc = half_diff**2 + m[0, 1] * m[1, 0]
    gap = 2.0 * np.sqrt(abs(disc))
    if gap <= tol * norm:
        nil = m - half_tr * np.eye(2)
        w = np.eye(2)[int(np.argmax(np.linalg.norm(nil, axis=0)))]
        v = nil @ w
        return JordanForm(
            JordanCase.REPEATED_REAL_BLOCK,
            np.array([[half_tr, 1.0], [0.0, half_tr]]),
            np.column_stack([v, w]),
        )

    if disc > 0:
        root = np.sqrt(disc)
        big = half_tr + np.copysign(root, half_tr) if half_tr != 0 else root
        small = det2(m) / big
        lam, mu = sorted((small, big), key=lambda e: (abs(e), -e))
        vecs = [_kernel_vector(m - e * np.eye(2)) for e in (lam, mu)]
        return JordanForm(JordanCase.DISTINCT_REAL, np.diag([lam, mu]), np.column_stack(vecs))

    im = np.sqrt(-disc)
    # Complex eigenvector w = x + iy for half_tr + i*im; P = [x, -y].
    b, c = m[0, 1], m[1, 0]
    if abs(b) >= abs(c):
        w = np.array([b, im * 1j - half_diff])
    else:
        w = np.array([half_diff + im * 1j, c])
    w = w / np.linalg.norm(w)
    p = np.column_stack([w.real, -w.imag])
    return JordanForm(JordanCase.COMPLEX_PAIR, np.array([[half_tr, -im], [im, half_tr]]), p)
