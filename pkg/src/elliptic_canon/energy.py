"""Quadratic energy functionals and their Euler-Lagrange systems.

An energy is ``integral of grad(f)^t E grad(f)`` with the gradient ordered as
``(u_x, v_x, u_y, v_y)`` and ``E = [[K, L], [L^t, M]]``, ``K = K^t``,
``M = M^t``.  Its Euler-Lagrange system has ``A = K``, ``B = (L + L^t)/2``
and ``C = M``.
"""
from dataclasses import dataclass

import numpy as np

from .canonical import INF, canonicalize
from .errors import DegenerateMultiplier, NotElliptic, OutOfTheoremRange
from .linalg_core import eig_sym
from .system_model import DEFAULT_TOL, SystemSpec

__all__ = [
    "EnergyDecision",
    "EnergyMatrix",
    "PSD_TOL",
    "construct_energy_matrix",
    "energy_decision",
    "euler_lagrange_system",
    "necessity_witness",
    "symmetric_canonical_matrices",
]

PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EnergyMatrix:
    E: np.ndarray

    def __post_init__(self):
        E = np.array(self.E, dtype=float)
        if E.shape != (4, 4):
            raise ValueError(f"energy matrix must be 4x4, got {E.shape}")
        if not np.all(np.isfinite(E)):
            raise ValueError("energy matrix entries must be finite")
        if not np.allclose(E, E.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(E).max())):
            raise ValueError("energy matrix must be symmetric")
        object.__setattr__(self, "E", 0.5 * (E + E.T))

    @classmethod
    def from_blocks(cls, K, L, M):
        K, L, M = (np.asarray(x, dtype=float) for x in (K, L, M))
        return cls(np.block([[K, L], [L.T, M]]))

    @property
    def K(self):
        return self.E[:2, :2]

    @property
    def L(self):
        return self.E[:2, 2:]

    @property
    def M(self):
        return self.E[2:, 2:]

    def eigenvalues(self):
        return eig_sym(self.E)

    def min_eigenvalue(self):
        return float(self.eigenvalues()[0])

    def is_nonneg(self, tol=PSD_TOL):
        return self.min_eigenvalue() >= -tol * max(1.0, np.linalg.norm(self.E))

    def density(self, grad):
        """``grad^t E grad`` for gradients stacked along the last axis."""
        g = np.asarray(grad, dtype=float)
        return np.einsum("...i,ij,...j->...", g, self.E, g)


def euler_lagrange_system(energy):
    if not isinstance(energy, EnergyMatrix):
        energy = EnergyMatrix(energy)
    L = energy.L
    return SystemSpec(energy.K.copy(), 0.5 * (L + L.T), energy.M.copy())


def _coupling(tau, sigma):
    d = tau**2 - sigma**2
    return (1 + sigma) * d, (1 - sigma) * d


def symmetric_canonical_matrices(tau, sigma):
    """Canonical system left-multiplied by ``diag(sigma + tau, sigma - tau)``,
    which makes all three matrices symmetric."""
    tau, sigma = float(tau), float(sigma)
    if sigma == tau or sigma == -tau:
        raise DegenerateMultiplier(f"sigma = +-tau ({sigma}, {tau}) makes the multiplier singular")
    A = (1 + tau) * np.diag([(1 + sigma) * (sigma + tau), (1 - sigma) * (sigma - tau)])
    l12, l21 = _coupling(tau, sigma)
    # (tau^2 - sigma^2) written as the mean of the couplings, so that it is
    # bit-identical to the symmetric part of L.
    b = 0.5 * (l12 + l21)
    B = np.array([[0.0, b], [b, 0.0]])
    C = (1 - tau) * np.diag([(1 - sigma) * (sigma + tau), (1 + sigma) * (sigma - tau)])
    return A, B, C


def construct_energy_matrix(tau, sigma, check=True):
    """Non-negative energy matrix for ``0 <= tau < sigma < 1``."""
    tau, sigma = float(tau), float(sigma)
    if not 0.0 <= tau < sigma < 1.0:
        raise OutOfTheoremRange(f"(tau, sigma) = ({tau}, {sigma}) is outside 0 <= tau < sigma < 1")
    K, _, M = symmetric_canonical_matrices(tau, sigma)
    l12, l21 = _coupling(tau, sigma)
    L = np.array([[0.0, l12], [l21, 0.0]])
    energy = EnergyMatrix.from_blocks(K, L, M)
    if check and not energy.is_nonneg():
        raise OutOfTheoremRange(f"energy matrix at ({tau}, {sigma}) is not non-negative")
    return energy


def necessity_witness(tau, sigma):
    """Smallest diagonal entry of the symmetric ``A``; negative exactly when
    ``sigma < tau``, so ``K`` (hence ``E``) cannot be non-negative."""
    A, _, _ = symmetric_canonical_matrices(tau, sigma)
    return float(min(A[0, 0], A[1, 1]))


@dataclass
class EnergyDecision:
    exists: bool
    reason: str
    tau: float | None = None
    sigma: float | None = None
    E: EnergyMatrix | None = None
    symmetric_system: tuple | None = None
    min_eigenvalue: float | None = None
    symmetric_system_omitted: bool = False

    def to_json(self):
        sigma = self.sigma
        if sigma is not None and sigma == INF:
            sigma = "inf"
        return {
            "exists": self.exists,
            "reason": self.reason,
            "tau": self.tau,
            "sigma": sigma,
            "E": None if self.E is None else self.E.E.tolist(),
            "symmetric_system": (
                None
                if self.symmetric_system is None
                else {k: m.tolist() for k, m in zip("ABC", self.symmetric_system)}
            ),
            "symmetric_system_omitted": self.symmetric_system_omitted,
            "min_eigenvalue": self.min_eigenvalue,
        }


def energy_decision(spec, tol=DEFAULT_TOL, report=None):
    """Decide whether a non-negative quadratic energy has ``spec`` (up to
    admissible transforms) as its Euler-Lagrange system."""
    report = report or canonicalize(spec, tol)
    if not report.elliptic:
        raise NotElliptic("energy decision needs an elliptic system")
    p = report.params
    if report.reducible:
        return EnergyDecision(False, "Reducible", tau=p.tau if p else None)
    if not report.strongly_elliptic:
        return EnergyDecision(False, "NotStronglyElliptic", tau=p.tau, sigma=p.sigma)
    tau, sigma = p.tau, p.sigma
    if not sigma > tau:
        dec = EnergyDecision(False, "SigmaLeqTau", tau=tau, sigma=sigma)
        if sigma != -tau and sigma != tau:
            dec.symmetric_system = symmetric_canonical_matrices(tau, sigma)
        else:
            dec.symmetric_system_omitted = True
        return dec
    energy = construct_energy_matrix(tau, sigma)
    return EnergyDecision(
        True,
        "Exists",
        tau=tau,
        sigma=sigma,
        E=energy,
        symmetric_system=symmetric_canonical_matrices(tau, sigma),
        min_eigenvalue=energy.min_eigenvalue(),
    )
