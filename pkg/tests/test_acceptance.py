"""Acceptance criteria, one test each.

Each test prints a ``PASS``/``FAIL criterion k: ...`` line (visible with
``pytest -s``); running this file directly prints all nine lines.
"""
import math
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from elliptic_canon.canonical import canonicalize, strong_ellipticity_direct
from elliptic_canon.dirichlet_verify import (
    BoundaryData,
    DiscreteField,
    Grid,
    assemble_direct,
    discrete_energy,
    el_consistency_check,
    energy_gradient,
    solve_direct,
)
from elliptic_canon.energy import (
    construct_energy_matrix,
    energy_decision,
    euler_lagrange_system,
    necessity_witness,
    symmetric_canonical_matrices,
)
from elliptic_canon.system_model import (
    DEFAULT_TOL,
    ComplexEquation,
    SystemSpec,
    characteristic_quartic,
    characteristic_roots,
    from_canonical_params,
    from_complex_equation,
)
from elliptic_canon.transforms import change_unknowns, change_variables, combine_equations, moebius_of_matrix

from helpers import rand_elliptic, rand_transform, root_set_distance


def report(k, ok, msg):
    print(f"{'PASS' if ok else 'FAIL'} criterion {k}: {msg}")
    return ok


def criterion_1():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for tau in np.round(np.arange(0.0, 0.85, 0.1), 10):
        for sigma in np.round(np.arange(-0.9, 0.95, 0.1), 10):
            if abs(sigma) == tau:
                continue  # sigma = tau excluded; sigma = -tau is the same reducible point
            p = canonicalize(from_canonical_params(tau, sigma)).params
            # (tau, -sigma) is equivalent to (tau, sigma); the canonical sigma is >= 0.
            worst = max(worst, abs(p.tau - tau), abs(p.sigma - abs(sigma)))
            count += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-7 and dt <= 5.0
    return report(1, ok, f"{count} grid points, max error {worst:.2e} (<= 1e-7), {dt:.2f} s (<= 5 s)")


def criterion_2():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        spec = rand_elliptic(rng, min_margin=1e-2)
        ref = canonicalize(spec).params
        moved = change_variables(spec, rand_transform(rng, positive_det=True))
        moved = combine_equations(change_unknowns(moved, rand_transform(rng)), rand_transform(rng))
        got = canonicalize(moved).params
        worst = max(worst, abs(got.kappa - ref.kappa), abs(got.lam - ref.lam))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt <= 10.0
    return report(2, ok, f"200 transforms, max (kappa, lambda) drift {worst:.2e} (<= 1e-6), {dt:.2f} s (<= 10 s)")


def _grid05():
    return np.round(np.arange(0.0, 1.0, 0.05), 10)


def criterion_3():
    worst, exact, count = math.inf, True, 0
    for tau in _grid05():
        for sigma in _grid05():
            if not tau < sigma:
                continue
            E = construct_energy_matrix(tau, sigma)
            worst = min(worst, E.min_eigenvalue())
            el = euler_lagrange_system(E)
            exact &= all(np.array_equal(a, b) for a, b in zip(el.matrices(), symmetric_canonical_matrices(tau, sigma)))
            count += 1
    ok = worst >= -1e-10 and exact
    return report(3, ok, f"{count} points, min eigenvalue {worst:.2e} (>= -1e-10), Euler-Lagrange exact: {exact}")


def criterion_4():
    worst, count = -math.inf, 0
    for tau in _grid05():
        for sigma in _grid05():
            if not sigma < tau:
                continue
            worst = max(worst, necessity_witness(tau, sigma))
            count += 1
    return report(4, worst < 0, f"{count} points, largest witness {worst:.3e} (< 0)")


def criterion_5():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    disagree, marginal = 0, 0
    for _ in range(500):
        spec = rand_elliptic(rng, min_margin=DEFAULT_TOL)
        rep = canonicalize(spec)
        lam_margin = abs(rep.params.lam) / rep.params.kappa if rep.params.lam is not None else math.inf
        if rep.marginal or rep.margins["ellipticity"] < 10 * DEFAULT_TOL or lam_margin < 10 * DEFAULT_TOL:
            marginal += 1
            continue
        disagree += rep.strongly_elliptic != strong_ellipticity_direct(spec)
    dt = time.perf_counter() - t0
    return report(5, disagree == 0, f"500 systems, {disagree} disagreements, {marginal} marginal excluded, {dt:.2f} s")


def criterion_6():
    spec = from_complex_equation(ComplexEquation(1, 1j, -1))
    rep = canonicalize(spec)
    dec = energy_decision(spec)
    sigma = rep.params.sigma
    ok = rep.elliptic and not rep.strongly_elliptic and sigma == math.inf and not dec.exists
    msg = f"elliptic={rep.elliptic} strongly_elliptic={rep.strongly_elliptic} sigma={sigma} exists={dec.exists}"
    return report(6, ok, msg)


def zpow_bc(p):
    return BoundaryData(lambda x, y: (((x + 1j * y) ** p).real, ((x + 1j * y) ** p).imag))


def criterion_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    g = Grid(31)
    worst_diff, worst_grad, monotone = 0.0, 0.0, True
    for tau, sigma in ((0.0, 0.5), (0.2, 0.6), (0.1, 0.9)):
        E = construct_energy_matrix(tau, sigma)
        rep = el_consistency_check(E, g, zpow_bc(2))
        worst_diff = max(worst_diff, rep.max_diff)
        monotone &= rep.energy_monotone
        # Directional finite difference of the discrete energy at a random field.
        F = rng.normal(size=(2, 33, 33))
        d = np.zeros_like(F)
        d[:, 1:-1, 1:-1] = rng.normal(size=(2, 31, 31))
        eps = 1e-6
        fd = (discrete_energy(E, DiscreteField(*(F + eps * d)), g) - discrete_energy(E, DiscreteField(*(F - eps * d)), g)) / (2 * eps)
        an = float(np.sum(energy_gradient(E, DiscreteField(*F), g) * d[:, 1:-1, 1:-1]))
        worst_grad = max(worst_grad, abs(fd - an) / abs(an))
    dt = time.perf_counter() - t0
    ok = worst_diff <= 1e-5 and monotone and worst_grad <= 1e-6 and dt <= 30.0
    msg = f"max |min - direct| {worst_diff:.2e} (<= 1e-5), monotone={monotone}, gradient rel err {worst_grad:.2e} (<= 1e-6), {dt:.2f} s (<= 30 s)"
    return report(7, ok, msg)


def criterion_8():
    laplace = SystemSpec(np.eye(2), np.zeros((2, 2)), np.eye(2))
    errs = []
    for n in (15, 31):
        g = Grid(n)
        x, y = g.coords()
        f = solve_direct(assemble_direct(laplace, g, zpow_bc(3)))
        errs.append(float(np.abs(f.u - ((x + 1j * y) ** 3).real).max()))
    ratio = errs[0] / errs[1] if errs[1] > 0 else math.inf
    ok = 3.5 <= ratio <= 4.5
    msg = f"errors {errs[0]:.2e} / {errs[1]:.2e}, ratio {ratio:.3g} (in [3.5, 4.5]); the scheme is exact on cubics"
    return report(8, ok, msg)


def criterion_9():
    rng = np.random.default_rng(9)
    worst_root, worst_det = 0.0, 0.0
    for _ in range(500):
        spec = rand_elliptic(rng, min_margin=1e-2)
        T = rand_transform(rng)
        mapped = [moebius_of_matrix(T, z) for z in characteristic_roots(spec)]
        got = characteristic_roots(change_variables(spec, T))
        worst_root = max(worst_root, root_set_distance(got, mapped) / max(1.0, max(abs(z) for z in mapped)))
        M = rand_transform(rng)
        q = np.array(characteristic_quartic(spec).coeffs)
        scale = abs(np.linalg.det(M)) * np.abs(q).max()
        for fn in (change_unknowns, combine_equations):
            new = np.array(characteristic_quartic(fn(spec, M)).coeffs)
            worst_det = max(worst_det, np.abs(new - np.linalg.det(M) * q).max() / scale)
        # Variables: F'(xi, eta) = F(t11 xi + t21 eta, t12 xi + t22 eta).
        old, new = characteristic_quartic(spec), characteristic_quartic(change_variables(spec, T))
        for xi, eta in rng.normal(size=(2, 2)):
            a, b = T[0, 0] * xi + T[1, 0] * eta, T[0, 1] * xi + T[1, 1] * eta
            ref = old.form(a, b)
            worst_det = max(worst_det, abs(new.form(xi, eta) - ref) / max(1.0, abs(ref)))
    ok = worst_root <= 1e-7 and worst_det <= 1e-7
    return report(9, ok, f"500 cases, root covariance {worst_root:.2e}, det scaling {worst_det:.2e} (<= 1e-7)")


def test_criterion_1_canonical_round_trip():
    assert criterion_1()


def test_criterion_2_transform_invariance():
    assert criterion_2()


def test_criterion_3_sufficiency():
    assert criterion_3()


def test_criterion_4_necessity():
    assert criterion_4()


def test_criterion_5_strong_ellipticity_cross_check():
    assert criterion_5()


def test_criterion_6_bitsadze():
    assert criterion_6()


def test_criterion_7_variational_direct():
    assert criterion_7()


def test_criterion_8_discretization_order():
    assert criterion_8()


def test_criterion_9_covariance():
    assert criterion_9()


if __name__ == "__main__":
    results = [fn() for fn in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                               criterion_6, criterion_7, criterion_8, criterion_9)]
    sys.exit(0 if all(results) else 1)
