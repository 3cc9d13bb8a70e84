import numpy as np
import pytest

from elliptic_canon.errors import PoleHit, SingularTransform
from elliptic_canon.linalg_core import eig_sym, fold_upper
from elliptic_canon.system_model import (
    SystemSpec,
    characteristic_quartic,
    characteristic_roots,
    from_complex_equation,
    ComplexEquation,
)
from elliptic_canon.transforms import (
    AdmissibleTransform,
    TransformKind,
    apply_transform,
    change_unknowns,
    change_variables,
    combine_equations,
    moebius_of_matrix,
    replay,
    transform_energy_unknowns,
    transform_energy_variables,
)

from helpers import rand_elliptic, rand_transform, root_set_distance

I2 = np.eye(2)
LAPLACE = SystemSpec(I2, np.zeros((2, 2)), I2)
BITSADZE = from_complex_equation(ComplexEquation(1, 1j, -1))


def phi(xi, eta):
    # Smooth test pair in the new coordinates.
    return np.array([np.sin(xi) * np.exp(0.3 * eta) + xi * eta, np.cos(xi - 2 * eta) + eta**3])


def phi_second(xi, eta, h=1e-4):
    fxx = (phi(xi + h, eta) - 2 * phi(xi, eta) + phi(xi - h, eta)) / h**2
    fyy = (phi(xi, eta + h) - 2 * phi(xi, eta) + phi(xi, eta - h)) / h**2
    fxy = (phi(xi + h, eta + h) - phi(xi + h, eta - h) - phi(xi - h, eta + h) + phi(xi - h, eta - h)) / (4 * h * h)
    return fxx, fxy, fyy


def apply_operator_fd(spec, g, x, y, h=1e-4):
    """A g_xx + 2B g_xy + C g_yy at (x, y) by central differences."""
    gxx = (g(x + h, y) - 2 * g(x, y) + g(x - h, y)) / h**2
    gyy = (g(x, y + h) - 2 * g(x, y) + g(x, y - h)) / h**2
    gxy = (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h)) / (4 * h * h)
    return spec.A @ gxx + 2 * spec.B @ gxy + spec.C @ gyy


def _swapped_index_variant(spec, T):
    # Variant with t21*t22 instead of t12*t22 as the C coefficient of B'.
    (t11, t12), (t21, t22) = T
    B1 = t11 * t21 * spec.A + (t11 * t22 + t12 * t21) * spec.B + t21 * t22 * spec.C
    return SystemSpec(change_variables(spec, T).A, B1, change_variables(spec, T).C)


def test_change_variables_chain_rule_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        spec = SystemSpec(*rng.normal(size=(3, 2, 2)))
        T = rand_transform(rng, cond_max=10)
        new = change_variables(spec, T)
        x, y = rng.uniform(-0.5, 0.5, 2)
        xi, eta = T @ [x, y]
        g = lambda a, b: phi(*(T @ [a, b]))
        lhs = apply_operator_fd(spec, g, x, y)
        fxx, fxy, fyy = phi_second(xi, eta)
        rhs = new.A @ fxx + 2 * new.B @ fxy + new.C @ fyy
        assert np.allclose(lhs, rhs, rtol=1e-4, atol=1e-4 * np.abs(T).max() ** 2 * spec.norm)


def test_swapped_index_b_coefficient_fails_oracle():
    spec = SystemSpec(I2, [[0.3, -1.0], [0.7, 0.2]], [[2.0, 0.5], [-0.4, 1.0]])
    T = np.array([[1.0, 2.0], [0.5, 3.0]])
    x, y = 0.1, -0.2
    g = lambda a, b: phi(*(T @ [a, b]))
    lhs = apply_operator_fd(spec, g, x, y)
    fxx, fxy, fyy = phi_second(*(T @ [x, y]))
    wrong = _swapped_index_variant(spec, T)
    rhs = wrong.A @ fxx + 2 * wrong.B @ fxy + wrong.C @ fyy
    assert not np.allclose(lhs, rhs, rtol=1e-3, atol=1e-3)


def test_change_unknowns_chain_rule_oracle():
    rng = np.random.default_rng(1)
    spec = SystemSpec(*rng.normal(size=(3, 2, 2)))
    Q = rand_transform(rng)
    new = change_unknowns(spec, Q)
    g = lambda a, b: Q @ phi(a, b)
    fxx, fxy, fyy = phi_second(0.2, 0.1)
    lhs = apply_operator_fd(spec, g, 0.2, 0.1)
    assert np.allclose(lhs, new.A @ fxx + 2 * new.B @ fxy + new.C @ fyy, rtol=1e-5, atol=1e-4)


def test_change_variables_examples():
    assert change_variables(BITSADZE, I2).allclose(BITSADZE, atol=0)
    s = change_variables(LAPLACE, np.diag([2.0, 1.0]))
    assert np.allclose(s.A, 4 * I2) and not s.B.any() and np.allclose(s.C, I2)
    spec = SystemSpec(np.diag([1.0, 2.0]), [[0, 1], [3, 0]], np.diag([5.0, 7.0]))
    s = change_variables(spec, [[0, 1], [1, 0]])
    assert np.allclose(s.A, spec.C) and np.allclose(s.B, spec.B) and np.allclose(s.C, spec.A)


def test_change_unknowns_and_equations_examples():
    Q = np.array([[1.0, 1.0], [0.0, 1.0]])
    s = change_unknowns(LAPLACE, Q)
    assert np.allclose(s.A, Q) and np.allclose(s.C, Q) and not s.B.any()
    s = change_unknowns(BITSADZE, np.diag([1.0, -1.0]))
    assert np.allclose(s.B, [[0, 1], [1, 0]])
    s = combine_equations(LAPLACE, 2 * I2)
    assert np.allclose(s.A, 2 * I2) and np.allclose(s.C, 2 * I2)
    rng = np.random.default_rng(2)
    spec = rand_elliptic(rng)
    assert np.allclose(combine_equations(spec, np.linalg.inv(spec.A)).A, I2)
    assert change_unknowns(spec, I2).allclose(spec, atol=0)
    assert combine_equations(spec, I2).allclose(spec, atol=0)


def test_singular_transforms_rejected():
    for fn in (change_variables, change_unknowns, combine_equations):
        with pytest.raises(SingularTransform):
            fn(LAPLACE, [[1, 2], [2, 4]])
    with pytest.raises(SingularTransform):
        AdmissibleTransform(TransformKind.VARIABLES, np.zeros((2, 2)))


def test_composition_order():
    rng = np.random.default_rng(3)
    for _ in range(50):
        spec = SystemSpec(*rng.normal(size=(3, 2, 2)))
        T1, T2 = rand_transform(rng), rand_transform(rng)
        a = change_variables(spec, T2 @ T1)
        b = change_variables(change_variables(spec, T1), T2)
        assert a.allclose(b, atol=1e-10 * max(1.0, a.norm))


def test_replay_and_json():
    t = [AdmissibleTransform(1, np.diag([2.0, 1.0])), AdmissibleTransform(3, 0.5 * I2)]
    s = replay(LAPLACE, t)
    assert np.allclose(s.A, 2 * I2) and np.allclose(s.C, 0.5 * I2)
    assert apply_transform(LAPLACE, t[0]).allclose(change_variables(LAPLACE, np.diag([2.0, 1.0])))
    assert t[0].to_json() == {"kind": "variables", "matrix": [[2.0, 0.0], [0.0, 1.0]]}


def test_moebius_examples():
    assert moebius_of_matrix(I2, 0.3 + 2j) == 0.3 + 2j
    assert abs(moebius_of_matrix(np.diag([2.0, 1.0]), 1j) - 0.5j) < 1e-15
    assert abs(moebius_of_matrix([[0, 1], [1, 0]], 1j) - 1j) < 1e-15
    with pytest.raises(PoleHit):
        moebius_of_matrix([[1.0, 1.0], [0.0, 1.0]], 1.0)


def test_root_covariance():
    rng = np.random.default_rng(4)
    for _ in range(200):
        spec = rand_elliptic(rng, min_margin=1e-2)
        T = rand_transform(rng, cond_max=10)
        r = characteristic_roots(spec)
        mapped = [moebius_of_matrix(T, z) for z in r]
        got = characteristic_roots(change_variables(spec, T))
        assert root_set_distance(got, mapped) <= 1e-7 * max(1.0, max(abs(z) for z in mapped))


def test_form_scaling():
    rng = np.random.default_rng(5)
    for _ in range(100):
        spec = SystemSpec(*rng.normal(size=(3, 2, 2)))
        M = rand_transform(rng)
        q = np.array(characteristic_quartic(spec).coeffs)
        det = np.linalg.det(M)
        assert np.allclose(characteristic_quartic(combine_equations(spec, M)).coeffs, det * q, atol=1e-10 * abs(det) * np.abs(q).max())
        assert np.allclose(characteristic_quartic(change_unknowns(spec, M)).coeffs, det * q, atol=1e-10 * abs(det) * np.abs(q).max())
        # Variables: F'(xi, eta) = F(t11 xi + t21 eta, t12 xi + t22 eta).
        new = characteristic_quartic(change_variables(spec, M))
        old = characteristic_quartic(spec)
        for xi, eta in rng.normal(size=(3, 2)):
            a, b = M[0, 0] * xi + M[1, 0] * eta, M[0, 1] * xi + M[1, 1] * eta
            assert new.form(xi, eta) == pytest.approx(old.form(a, b), rel=1e-9, abs=1e-9)


def _rand_psd(rng, rank=4):
    g = rng.normal(size=(4, rank))
    return g @ g.T


def _inertia(m, tol=1e-9):
    ev = eig_sym(m)
    s = tol * max(1.0, np.abs(ev).max())
    return int((ev > s).sum()), int((np.abs(ev) <= s).sum()), int((ev < -s).sum())


def test_energy_variables_density_oracle():
    # grad g = (T^t (x) I) grad phi for g(z) = phi(Tz), ordering (u_x, v_x, u_y, v_y).
    rng = np.random.default_rng(6)
    for _ in range(50):
        E = rng.normal(size=(4, 4))
        E = E + E.T
        T = rand_transform(rng)
        E0 = transform_energy_variables(E, T)
        assert np.array_equal(E0, E0.T)
        p = rng.normal(size=4)
        g = np.kron(T.T, I2) @ p
        assert g @ E @ g == pytest.approx(p @ E0 @ p, rel=1e-10, abs=1e-10)


def test_energy_unknowns_density_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        E = rng.normal(size=(4, 4))
        E = E + E.T
        Q = rand_transform(rng)
        E1 = transform_energy_unknowns(E, Q)
        assert np.array_equal(E1, E1.T)
        p = rng.normal(size=4)
        g = np.kron(I2, Q) @ p
        assert g @ E @ g == pytest.approx(p @ E1 @ p, rel=1e-10, abs=1e-10)


def test_energy_transform_examples():
    rng = np.random.default_rng(8)
    E = _rand_psd(rng)
    assert np.allclose(transform_energy_variables(E, I2), E)
    assert np.allclose(transform_energy_variables(E, 2 * I2), 4 * E)
    assert np.allclose(transform_energy_unknowns(E, I2), E)
    E1 = transform_energy_unknowns(E, np.diag([1.0, 2.0]))
    K, K1 = E[:2, :2], E1[:2, :2]
    assert np.allclose([K1[0, 0], K1[0, 1], K1[1, 1]], [K[0, 0], 2 * K[0, 1], 4 * K[1, 1]])


def test_energy_transforms_preserve_inertia():
    rng = np.random.default_rng(9)
    for rank in (4, 3, 2):
        for _ in range(30):
            E = _rand_psd(rng, rank)
            E = E - (0.3 * np.eye(4) if rank == 4 and rng.random() < 0.5 else 0.0)
            T, Q = rand_transform(rng, 10), rand_transform(rng, 10)
            ref = _inertia(E)
            assert _inertia(transform_energy_variables(E, T)) == ref
            assert _inertia(transform_energy_unknowns(E, Q)) == ref
