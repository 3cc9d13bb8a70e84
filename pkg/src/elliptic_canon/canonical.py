"""Reduction of an elliptic system to canonical form.

The pipeline has four stages:

1. a change of variables whose Moebius action sends the characteristic
   roots to ``kappa*i`` and ``i`` with ``0 < kappa <= 1``;
2. left multiplication by ``A1^-1``;
3. similarity bringing ``C2`` to its real Jordan form;
4. a diagonal similarity normalising the off-diagonal of ``B``.

Non-reducible systems end at ``A = I``, ``C = diag(lam, kappa^2/lam)`` and
``B = [[0, 1], [-(1 - lam)(1 - kappa^2/lam)/4, 0]]``.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InternalInconsistency, InvalidParams, NotElliptic
from .jsonfmt import to_plain
from .linalg_core import JordanCase, JordanForm, det2, fold_upper, inv2, jordan_2x2, poly_eval, refine_double_root
from .system_model import DEFAULT_TOL, characteristic_quartic, characteristic_roots, ellipticity_info
from .transforms import AdmissibleTransform, TransformKind, apply_transform

__all__ = [
    "CanonicalParams",
    "CanonicalReport",
    "Tolerances",
    "build_moebius_to_imaginary",
    "canonical_matrices",
    "canonicalize",
    "complex_canonical_equation",
    "hlw_extrema",
    "strong_ellipticity_direct",
    "to_tau_sigma",
]

INF = math.inf


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by :func:`canonicalize`; all relative."""

    ellipticity: float = DEFAULT_TOL
    root_cluster: float = 1e-3
    double_root_backward: float = 1e-12
    jordan: float = 1e-7
    reducible: float = 1e-8
    eigen_product: float = 1e-6

    def to_json(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class CanonicalParams:
    kappa: float
    lam: float | None
    tau: float
    sigma: float | None

    def to_json(self):
        sigma = self.sigma
        if sigma is not None and math.isinf(sigma):
            sigma = "inf"
        return {"kappa": self.kappa, "lambda": self.lam, "tau": self.tau, "sigma": sigma}


@dataclass
class CanonicalReport:
    elliptic: bool
    reducible: bool = False
    strongly_elliptic: bool = False
    params: CanonicalParams | None = None
    trace: list = field(default_factory=list)
    final_matrices: tuple | None = None
    jordan_case: str | None = None
    margins: dict = field(default_factory=dict)
    marginal: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)

    def to_json(self):
        out = to_plain({
            "elliptic": self.elliptic,
            "reducible": self.reducible,
            "strongly_elliptic": self.strongly_elliptic,
            "marginal": self.marginal,
            "params": self.params.to_json() if self.params else None,
            "jordan_case": self.jordan_case,
            "trace": [t.to_json() for t in self.trace],
            "final_matrices": None,
            "margins": dict(self.margins),
            "tolerances": self.tolerances.to_json(),
        })
        if self.final_matrices is not None:
            out["final_matrices"] = {k: m.tolist() for k, m in zip("ABC", self.final_matrices)}
        return out


def canonical_matrices(kappa, lam):
    """``(A, B, C)`` of the canonical operator with parameters ``(kappa, lam)``."""
    b = -0.25 * (1.0 - lam) * (1.0 - kappa**2 / lam)
    return np.eye(2), np.array([[0.0, 1.0], [b, 0.0]]), np.diag([lam, kappa**2 / lam])


def build_moebius_to_imaginary(lam1, lam2):
    """Variable change ``T`` (det 1) whose Moebius map sends ``lam2 -> i`` and
    ``lam1 -> kappa*i`` with ``0 < kappa <= 1``.

    The map is an affine normalisation of ``lam2`` followed by the hyperbolic
    rotation about ``i`` that puts the image of ``lam1`` on the imaginary
    axis below ``i``.  ``tau = (1 - kappa)/(1 + kappa)`` is the
    pseudo-hyperbolic distance between the roots, so no relabelling is needed.
    """
    lam1, lam2 = complex(lam1), complex(lam2)
    if lam1.imag <= 0 or lam2.imag <= 0:
        raise InvalidParams("both roots must lie in the open upper half-plane")
    x2, y2 = lam2.real, lam2.imag
    w = (lam1 - x2) / y2
    cay = (w - 1j) / (w + 1j)
    tau = abs(cay)
    theta = 0.0 if tau == 0.0 else 0.5 * (math.pi - cmath.phase(cay))
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, s], [-s, c]])
    lam_map = rot @ np.array([[1.0, -x2], [0.0, y2]])
    (a, b), (cc, d) = lam_map
    T = np.array([[d, -cc], [-b, a]])
    T /= math.sqrt(det2(T))
    kappa = (1.0 - tau) / (1.0 + tau)
    return T, kappa


def to_tau_sigma(kappa, lam):
    kappa, lam = float(kappa), float(lam)
    if not 0.0 < kappa <= 1.0:
        raise InvalidParams(f"kappa={kappa} outside (0, 1]")
    # lam = kappa^2 (reducible) is still mapped, e.g. (1, 1) -> (0, 0).
    if abs(lam) > kappa * (1 + 1e-12) or lam == 0.0:
        raise InvalidParams(f"lambda={lam} outside [-kappa, kappa] minus {{0}}")
    tau = (1.0 - kappa) / (1.0 + kappa)
    if abs(kappa + lam) <= 1e-12 * kappa:
        return tau, INF
    return tau, (kappa - lam) / (kappa + lam)


def complex_canonical_equation(kappa, lam):
    """Coefficients of ``d^2 f, d dbar f, d^2 conj(f), d dbar conj(f)`` in the
    single complex equation equivalent to the canonical system.

    ``lam = kappa^2`` (the reducible point) is accepted: the coefficients
    are still well defined there.
    """
    kappa, lam = float(kappa), float(lam)
    if not 0.0 < kappa <= 1.0 or abs(lam) > kappa * (1 + 1e-12) or lam == 0.0:
        raise InvalidParams(f"(kappa, lambda) = ({kappa}, {lam}) is not a valid parameter pair")
    return (
        (1 - kappa) * (kappa + lam),
        (1 + kappa) * (kappa + lam),
        (1 + kappa) * (kappa - lam),
        (1 - kappa) * (kappa - lam),
    )


def _push(spec, trace, kind, matrix):
    t = AdmissibleTransform(kind, matrix)
    trace.append(t)
    return apply_transform(spec, t)


def _similarity(spec, trace, S):
    spec = _push(spec, trace, TransformKind.UNKNOWNS, S)
    return _push(spec, trace, TransformKind.EQUATIONS, inv2(S))


def _rotation_pair_basis(B3):
    # S with S^-1 B3 S = [[0, 1], [-det B3, 0]]: columns s1 = B3 s2, s2 = e,
    # using B3^2 = -det(B3) I for traceless B3.
    best = None
    for e in np.eye(2):
        S = np.column_stack([B3 @ e, e])
        if best is None or abs(det2(S)) > abs(det2(best)):
            best = S
    return best


def canonicalize(spec, tol=DEFAULT_TOL, tolerances=None):
    """Run the reduction and report flags, parameters and the transform trace."""
    tols = tolerances or Tolerances(ellipticity=tol)
    info = ellipticity_info(spec, tols.ellipticity)
    report = CanonicalReport(elliptic=info.elliptic, tolerances=tols)
    report.margins["ellipticity"] = info.margin
    report.marginal = info.marginal
    if not info.elliptic:
        return report

    trace = report.trace
    r1, r2 = characteristic_roots(spec, tols.ellipticity)
    gap = abs(r1 - r2) / (0.5 * (abs(r1) + abs(r2)))
    report.margins["root_gap"] = gap
    if gap <= tols.root_cluster:
        # A double root splits by ~sqrt(eps) in the companion solve; accept the
        # refined cluster centre when it is a double root to rounding level.
        coeffs = characteristic_quartic(spec).coeffs
        centre = refine_double_root(coeffs, 0.5 * (r1 + r2))
        scale = sum(abs(c) * abs(centre) ** (4 - k) for k, c in enumerate(coeffs))
        backward = abs(poly_eval(coeffs, centre)) / scale
        report.margins["double_root_backward"] = backward
        if backward <= tols.double_root_backward:
            r1 = r2 = fold_upper(centre)

    # Step 1: roots -> {kappa*i, i}.
    T1, kappa = build_moebius_to_imaginary(r1, r2)
    cur = _push(spec, trace, TransformKind.VARIABLES, T1)
    # Step 2: A -> I.
    cur = _push(cur, trace, TransformKind.EQUATIONS, inv2(cur.A))
    # Step 3: C -> Jordan form.
    jf = jordan_2x2(cur.C, tols.jordan)
    if jf.case is JordanCase.REPEATED_REAL_BLOCK and abs(abs(jf.J[0, 0]) - kappa**2) > tols.reducible * kappa**2:
        # A genuine block needs the double eigenvalue kappa = kappa^2, i.e. kappa = 1.
        # Otherwise the tiny gap is rounding on a scalar matrix.
        half_tr = 0.5 * (cur.C[0, 0] + cur.C[1, 1])
        jf = JordanForm(JordanCase.REPEATED_REAL_DIAGONAL, half_tr * np.eye(2), np.eye(2))
    report.jordan_case = jf.case.value
    if jf.case is JordanCase.COMPLEX_PAIR:
        raise InternalInconsistency("C2 has complex eigenvalues, impossible for an elliptic system")

    if jf.case is JordanCase.REPEATED_REAL_BLOCK:
        cur = _similarity(cur, trace, jf.P)
        report.reducible = True
        report.strongly_elliptic = bool(jf.J[0, 0] > 0)
        report.params = CanonicalParams(kappa, None, (1 - kappa) / (1 + kappa), None)
        report.final_matrices = cur.matrices()
        return report

    if jf.case is JordanCase.REPEATED_REAL_DIAGONAL:
        lam = math.copysign(kappa, jf.J[0, 0])
        report.margins["eigen_product"] = abs(jf.J[0, 0] ** 2 - kappa**2) / kappa**2
    else:
        cur = _similarity(cur, trace, jf.P)
        lam = float(jf.J[0, 0])
        report.margins["eigen_product"] = abs(lam * jf.J[1, 1] - kappa**2) / kappa**2
    if report.margins["eigen_product"] > tols.eigen_product:
        raise InternalInconsistency(
            f"eigenvalue product of C2 deviates from kappa^2 by {report.margins['eigen_product']:.3g}"
        )

    report.strongly_elliptic = bool(lam > 0)
    red_margin = abs(lam - kappa**2) / kappa**2
    report.margins["reducible"] = red_margin
    report.marginal |= tols.reducible < red_margin <= 10 * tols.reducible
    tau = (1 - kappa) / (1 + kappa)

    # Step 4: normalise B.
    B3 = cur.B
    if jf.case is JordanCase.DISTINCT_REAL:
        b2 = B3[0, 1]
        reducible = red_margin <= tols.reducible or abs(b2) <= tols.reducible * max(1.0, np.abs(B3).max())
        if not reducible:
            cur = _similarity(cur, trace, np.diag([b2, 1.0]))
    else:
        reducible = red_margin <= tols.reducible
        if not reducible:
            cur = _similarity(cur, trace, _rotation_pair_basis(B3))

    report.final_matrices = cur.matrices()
    if reducible:
        report.reducible = True
        report.params = CanonicalParams(kappa, None, tau, None)
        return report

    _, sigma = to_tau_sigma(kappa, max(-kappa, min(kappa, lam)))
    report.params = CanonicalParams(kappa, lam, tau, sigma)
    target = canonical_matrices(kappa, lam)
    report.margins["final_form"] = max(float(np.abs(x - y).max()) for x, y in zip(cur.matrices(), target))
    return report


def _hlw_values(spec, p, q):
    # det((1+p)A + 2qB + (1-p)C): the open unit disk in (p, q) is the cone
    # beta^2 < alpha*gamma projectivised along alpha + gamma = 2.
    A, B, C = spec.matrices()
    p = np.asarray(p)[..., None, None]
    q = np.asarray(q)[..., None, None]
    m = (1 + p) * A + 2 * q * B + (1 - p) * C
    return (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]) / spec.norm**2


def hlw_extrema(spec, n_radii=40, n_angles=96):
    """Minimum and maximum of the normalised HLW determinant on the cone.

    Grid scan over the closed disk followed by bounded local refinement from
    the best grid point of each sign.
    """
    r = np.linspace(0.0, 1.0, n_radii + 1)
    phi = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    vals = _hlw_values(spec, rr * np.cos(pp), rr * np.sin(pp))

    def refine(sign):
        idx = np.unravel_index(np.argmin(sign * vals), vals.shape)
        x0 = np.array([rr[idx], pp[idx]])

        def obj(x):
            return sign * float(_hlw_values(spec, x[0] * math.cos(x[1]), x[0] * math.sin(x[1])))

        res = minimize(obj, x0, method="L-BFGS-B", bounds=[(0.0, 1.0), (None, None)])
        return sign * min(res.fun, obj(x0))

    return refine(1.0), refine(-1.0)


def strong_ellipticity_direct(spec, threshold=1e-10, tol=DEFAULT_TOL):
    """Strong ellipticity from ``det(alpha A + 2 beta B + gamma C) != 0`` on
    ``beta^2 < alpha gamma``.

    The determinant is continuous and nonzero on the cone boundary for an
    elliptic system, so it vanishes inside iff its extrema straddle zero
    (or touch it within ``threshold``).
    """
    if not ellipticity_info(spec, tol).elliptic:
        raise NotElliptic("strong ellipticity requires an elliptic system")
    lo, hi = hlw_extrema(spec)
    return not (lo <= threshold and hi >= -threshold)
