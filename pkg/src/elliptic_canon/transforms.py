"""Admissible transformations and their action on systems, roots and energies.

Conventions (checked against a finite-difference chain-rule oracle in the
test suite):

* variables, kind 1: new coordinates ``zeta = T z``;
* unknowns, kind 2: ``A' = A Q`` etc., i.e. the old unknowns are
  ``f = Q phi`` in terms of the new ones ``phi``;
* equations, kind 3: ``A' = P A`` etc.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import PoleHit, SingularTransform
from .linalg_core import as_mat2, det2, fold_upper
from .system_model import SystemSpec

__all__ = [
    "AdmissibleTransform",
    "TransformKind",
    "apply_transform",
    "change_unknowns",
    "change_variables",
    "combine_equations",
    "moebius_of_matrix",
    "replay",
    "transform_energy_unknowns",
    "transform_energy_variables",
]


class TransformKind(IntEnum):
    VARIABLES = 1
    UNKNOWNS = 2
    EQUATIONS = 3


def _checked(m):
    m = as_mat2(m)
    if abs(det2(m)) <= 1e-12 * np.abs(m).max() ** 2:
        raise SingularTransform(f"transform matrix {m.tolist()} is singular")
    return m


@dataclass(frozen=True, eq=False)
class AdmissibleTransform:
    kind: TransformKind
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", TransformKind(self.kind))
        object.__setattr__(self, "matrix", _checked(self.matrix))

    def to_json(self):
        return {"kind": self.kind.name.lower(), "matrix": self.matrix.tolist()}


def change_variables(spec, T):
    """System in the coordinates ``zeta = T z``.

    ``[[A', B'], [B', C']]`` is the block congruence ``T [[A, B], [B, C]] T^t``
    with scalar entries of ``T`` multiplying 2x2 blocks.
    """
    T = _checked(T)
    (t11, t12), (t21, t22) = T
    A, B, C = spec.matrices()
    A1 = t11 * t11 * A + 2 * t11 * t12 * B + t12 * t12 * C
    B1 = t11 * t21 * A + (t11 * t22 + t12 * t21) * B + t12 * t22 * C
    C1 = t21 * t21 * A + 2 * t21 * t22 * B + t22 * t22 * C
    return SystemSpec(A1, B1, C1)


def change_unknowns(spec, Q):
    Q = _checked(Q)
    return SystemSpec(spec.A @ Q, spec.B @ Q, spec.C @ Q)


def combine_equations(spec, P):
    P = _checked(P)
    return SystemSpec(P @ spec.A, P @ spec.B, P @ spec.C)


_APPLY = {
    TransformKind.VARIABLES: change_variables,
    TransformKind.UNKNOWNS: change_unknowns,
    TransformKind.EQUATIONS: combine_equations,
}


def apply_transform(spec, transform):
    return _APPLY[transform.kind](spec, transform.matrix)


def replay(spec, trace):
    for t in trace:
        spec = apply_transform(spec, t)
    return spec


def moebius_of_matrix(T, lam):
    """Image ``(t22 l - t21) / (-t12 l + t11)`` of a characteristic root.

    The result is folded into the upper half-plane (orientation-reversing
    ``T`` maps it to the lower one).
    """
    T = as_mat2(T)
    lam = complex(lam)
    (t11, t12), (t21, t22) = T
    den = -t12 * lam + t11
    if abs(den) <= 1e-12 * (1.0 + abs(lam)) * np.abs(T).max():
        raise PoleHit(f"root {lam} is a pole of the Moebius map of {T.tolist()}")
    return fold_upper((t22 * lam - t21) / den)


def _blocks(E):
    E = np.asarray(E, dtype=float)
    return E[:2, :2], E[:2, 2:], E[2:, 2:]


def _assemble(K, L, M):
    E = np.block([[K, L], [L.T, M]])
    # Exact symmetry by construction; rounding can only touch K and M.
    E[:2, :2] = 0.5 * (K + K.T)
    E[2:, 2:] = 0.5 * (M + M.T)
    return E


def transform_energy_variables(E, T):
    """Energy matrix in the coordinates ``zeta = T z``: blockwise ``T E T^t``.

    The area element contributes a further positive factor ``1/|det T|``
    that is left out; it changes neither definiteness nor the
    Euler-Lagrange system up to scale.
    """
    T = _checked(T)
    K, L, M = _blocks(E)
    (t11, t12), (t21, t22) = T
    K0 = t11 * t11 * K + t11 * t12 * (L + L.T) + t12 * t12 * M
    L0 = t11 * t21 * K + t11 * t22 * L + t12 * t21 * L.T + t12 * t22 * M
    M0 = t21 * t21 * K + t21 * t22 * (L + L.T) + t22 * t22 * M
    return _assemble(K0, L0, M0)


def transform_energy_unknowns(E, Q):
    """Energy matrix after substituting ``f = Q phi``: blockwise ``Q^t X Q``."""
    Q = _checked(Q)
    K, L, M = _blocks(E)
    return _assemble(Q.T @ K @ Q, Q.T @ L @ Q, Q.T @ M @ Q)
