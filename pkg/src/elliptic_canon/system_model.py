"""Constant-coefficient systems ``A f_xx + 2B f_xy + C f_yy = 0`` in the plane.

Here ``f = (u, v)`` and ``A, B, C`` are real 2x2 matrices.  A complex
equation ``a f_xx + 2b f_xy + c f_yy = 0`` is the special case where every
matrix has the form ``[[x, -y], [y, x]]``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NotElliptic
from .linalg_core import as_mat2, det2, fold_upper, solve_quartic

__all__ = [
    "DEFAULT_TOL",
    "CharacteristicQuartic",
    "ComplexEquation",
    "EllipticityInfo",
    "SystemSpec",
    "characteristic_quartic",
    "characteristic_roots",
    "embed_complex",
    "ellipticity_info",
    "from_canonical_params",
    "from_complex_equation",
    "is_elliptic",
    "spec_from_descriptor",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SystemSpec:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, as_mat2(getattr(self, name)))

    @property
    def norm(self):
        return max(np.abs(self.A).max(), np.abs(self.B).max(), np.abs(self.C).max())

    def matrices(self):
        return self.A, self.B, self.C

    def allclose(self, other, atol=1e-10, rtol=0.0):
        return all(np.allclose(x, y, atol=atol, rtol=rtol) for x, y in zip(self.matrices(), other.matrices()))

    def to_json(self):
        return {"kind": "matrices", "A": self.A.tolist(), "B": self.B.tolist(), "C": self.C.tolist()}

    def __repr__(self):
        return f"SystemSpec(A={self.A.tolist()}, B={self.B.tolist()}, C={self.C.tolist()})"


@dataclass(frozen=True)
class ComplexEquation:
    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        for name in "abc":
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise InvalidParams("all coefficients of the complex equation vanish")


def embed_complex(z):
    """The matrix ``[[x, -y], [y, x]]`` representing ``z = x + iy``."""
    z = complex(z)
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def from_complex_equation(eq):
    return SystemSpec(embed_complex(eq.a), embed_complex(eq.b), embed_complex(eq.c))


@dataclass(frozen=True)
class CharacteristicQuartic:
    """Coefficients of ``det(A l^2 + 2B l + C)``, leading term first.

    The homogeneous form is ``F(xi, eta) = sum c_k xi^k eta^(4-k)``, so the
    direction ``eta = 0`` is governed by ``c4 = det A``.
    """

    c4: float
    c3: float
    c2: float
    c1: float
    c0: float

    @property
    def coeffs(self):
        return (self.c4, self.c3, self.c2, self.c1, self.c0)

    def form(self, xi, eta):
        return sum(c * xi**k * eta ** (4 - k) for c, k in zip(self.coeffs, range(4, -1, -1)))

    def roots(self):
        return solve_quartic(*self.coeffs)


def _mixed_det(x, y):
    # det(x + y) - det(x) - det(y): the polarisation of det on 2x2 matrices.
    return x[0, 0] * y[1, 1] + x[1, 1] * y[0, 0] - x[0, 1] * y[1, 0] - x[1, 0] * y[0, 1]


def characteristic_quartic(spec):
    A, B, C = spec.matrices()
    B2 = 2.0 * B
    return CharacteristicQuartic(
        c4=det2(A),
        c3=_mixed_det(A, B2),
        c2=det2(B2) + _mixed_det(A, C),
        c1=_mixed_det(B2, C),
        c0=det2(C),
    )


@dataclass(frozen=True)
class EllipticityInfo:
    elliptic: bool
    margin: float
    marginal: bool
    roots: tuple


def ellipticity_info(spec, tol=DEFAULT_TOL):
    """Ellipticity test plus the relative margin it was decided by.

    The margin is the smallest of ``|det A| / |A|^2`` and
    ``|Im r| / (1 + |r|)`` over the characteristic roots ``r``; the decision
    is ``margin > tol`` and it is ``marginal`` within a factor 10 of ``tol``.
    """
    A = spec.A
    anorm = np.abs(A).max()
    det_margin = abs(det2(A)) / anorm**2 if anorm > 0 else 0.0
    if det_margin <= tol:
        return EllipticityInfo(False, det_margin, det_margin > tol / 10.0, ())
    roots = tuple(characteristic_quartic(spec).roots())
    root_margin = min(abs(r.imag) / (1.0 + abs(r)) for r in roots)
    margin = min(det_margin, root_margin)
    return EllipticityInfo(margin > tol, margin, tol / 10.0 < margin <= 10.0 * tol, roots)


def is_elliptic(spec, tol=DEFAULT_TOL):
    return ellipticity_info(spec, tol).elliptic


def characteristic_roots(spec, tol=DEFAULT_TOL):
    """The two upper half-plane characteristic roots, ordered by imaginary part.

    With this order the normalising Moebius map sends the second root to ``i``
    and the first to ``kappa*i`` with ``kappa`` in ``(0, 1]``.
    """
    info = ellipticity_info(spec, tol)
    if not info.elliptic:
        raise NotElliptic(f"system is not elliptic (margin {info.margin:.3g})")
    upper = [r for r in info.roots if r.imag > 0]
    if len(upper) != 2:
        # Conjugate pairing broken by rounding: fold and keep two by imaginary part.
        upper = sorted((fold_upper(r) for r in info.roots), key=lambda z: -z.imag)[:2]
    r1, r2 = sorted(upper, key=lambda z: (z.imag, z.real))
    return r1, r2


def from_canonical_params(tau, sigma):
    """Real system of the complex canonical operator with parameters (tau, sigma)."""
    tau, sigma = float(tau), float(sigma)
    if not (np.isfinite(tau) and np.isfinite(sigma)):
        raise InvalidParams("tau and sigma must be finite")
    if not 0.0 <= tau < 1.0:
        raise InvalidParams(f"tau={tau} outside [0, 1)")
    if abs(sigma) == 1.0:
        raise InvalidParams("|sigma| = 1 gives a degenerate system")
    A = (1 + tau) * np.diag([1 + sigma, 1 - sigma])
    B = np.array([[0.0, tau - sigma], [-(tau + sigma), 0.0]])
    C = (1 - tau) * np.diag([1 - sigma, 1 + sigma])
    return SystemSpec(A, B, C)


def _strict_float(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InvalidParams(f"{what}: expected a number, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise InvalidParams(f"{what}: non-finite value")
    return x


def _matrix(obj, what):
    if not (isinstance(obj, list) and len(obj) == 2 and all(isinstance(r, list) and len(r) == 2 for r in obj)):
        raise InvalidParams(f"{what}: expected a 2x2 nested list")
    return np.array([[_strict_float(v, what) for v in row] for row in obj])


def _complex(obj, what):
    if not (isinstance(obj, list) and len(obj) == 2):
        raise InvalidParams(f"{what}: expected [re, im]")
    return complex(_strict_float(obj[0], what), _strict_float(obj[1], what))


def spec_from_descriptor(desc):
    """Build a SystemSpec from the JSON system descriptor (already decoded)."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise InvalidParams("descriptor must be an object with a 'kind' field")
    kind = desc["kind"]
    if kind == "matrices":
        return SystemSpec(*(_matrix(desc.get(k), k) for k in "ABC"))
    if kind == "complex":
        return from_complex_equation(ComplexEquation(*(_complex(desc.get(k), k) for k in "abc")))
    if kind == "canonical":
        return from_canonical_params(_strict_float(desc.get("tau"), "tau"), _strict_float(desc.get("sigma"), "sigma"))
    raise InvalidParams(f"unknown descriptor kind {kind!r}")
