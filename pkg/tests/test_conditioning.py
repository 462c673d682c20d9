import numpy as np
import pytest

from reskern.conditioning import (
    DoubleConstant,
    condition_bounds,
    depth_sweep,
    double_constant_of,
    gram,
    pairwise_cosines,
    sym_eig,
    uniform_multisphere,
)
from reskern.multisphere import rescgpk_multisphere_normalized
from reskern.params import KernelParams


def test_uniform_multisphere_columns_are_unit(rng):
    x = uniform_multisphere(5, 3, 4, rng)
    assert x.shape == (5, 3, 4)
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-14)


def test_gram_examples(rng):
    x = uniform_multisphere(1, 3, 4, rng)[0]
    p = KernelParams(L=3, d=4)
    a = gram(np.stack([x, x]), lambda t: rescgpk_multisphere_normalized(t, p))
    np.testing.assert_allclose(a, np.ones((2, 2)), atol=1e-12)

    e1 = np.zeros((2, 2, 4))
    e1[0, 0], e1[1, 1] = 1.0, 1.0
    linear = KernelParams(L=1, d=4, C0=2, alpha=0.0)
    a = gram(e1, lambda t: rescgpk_multisphere_normalized(t, linear))
    assert a[0, 1] == 0.0 and a[1, 0] == 0.0
    assert gram(e1[:1], lambda t: t[..., 0]).tolist() == [[1.0]]


def test_gram_off_diagonals_in_unit_interval():
    points = uniform_multisphere(100, 3, 8, np.random.default_rng(0))
    p = KernelParams(L=10, d=8, head="Tr")
    from reskern.multisphere import multisphere_kernels

    a = gram(points, lambda t: multisphere_kernels(t, p)["gpk_bar"])
    off = a[~np.eye(100, dtype=bool)]
    assert np.all((off > 0) & (off < 1))
    assert np.array_equal(a, a.T) and np.all(np.diag(a) == 1.0)


def test_gram_reports_nonfinite_pair(rng):
    points = uniform_multisphere(3, 2, 2, rng)
    with pytest.raises(ValueError, match=r"pair \(0, 2\)"):
        gram(points, lambda t: np.array([0.1, np.nan, 0.2]))


def test_pairwise_cosines(rng):
    x = uniform_multisphere(3, 2, 5, rng)
    t = pairwise_cosines(x)
    assert t[1, 2, 3] == pytest.approx(x[1, :, 3] @ x[2, :, 3])


def test_double_constant_examples():
    b = DoubleConstant(0.3, 5).matrix()
    assert double_constant_of(b).b == pytest.approx(0.3)
    a = np.array([[1.0, 0.2], [0.2, 1.0]])
    assert double_constant_of(a).b == pytest.approx(0.2)
    dc = DoubleConstant(0.5, 4)
    assert (dc.lambda_max, dc.lambda_min, dc.rho) == pytest.approx((2.5, 0.5, 5.0))
    assert dc.rho == pytest.approx(1 + 4 * 0.5 / (1 - 0.5))
    evals = sym_eig(dc.matrix())[0]
    np.testing.assert_allclose(evals, [0.5, 0.5, 0.5, 2.5], atol=1e-12)


def test_double_constant_rejects_negative_mean():
    with pytest.raises(ValueError):
        double_constant_of(np.array([[1.0, -0.2], [-0.2, 1.0]]))


def test_sym_eig_examples(rng):
    evals, vecs = sym_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(evals, [1, 2, 3])
    np.testing.assert_allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])
    np.testing.assert_allclose(sym_eig(np.array([[1, 0.3], [0.3, 1]]))[0], [0.7, 1.3])
    with pytest.raises(ValueError):
        sym_eig(np.array([[1.0, 0.2], [0.1, 1.0]]))

    m = rng.standard_normal((300, 300))
    a = m + m.T
    lam, v = sym_eig(a)
    assert np.linalg.norm(a - v @ np.diag(lam) @ v.T) <= 1e-9 * np.linalg.norm(a)


@pytest.mark.parametrize("n,b", [(4, 0.5), (10, 0.2), (30, 0.9)])
def test_spectrum_formula(n, b):
    dc = DoubleConstant(b, n)
    evals = sym_eig(dc.matrix())[0]
    np.testing.assert_allclose(evals, [dc.lambda_min] * (n - 1) + [dc.lambda_max], atol=1e-10)


@pytest.mark.parametrize("uniform", [False, True])
def test_bounds_on_double_constant(uniform):
    rep = condition_bounds(DoubleConstant(0.4, 6).matrix(), uniform)
    assert rep.epsilon == pytest.approx(0, abs=1e-15)
    assert rep.rho_lower == pytest.approx(rep.rho_actual)
    assert rep.rho_upper == pytest.approx(rep.rho_actual)


def test_bounds_on_identity():
    rep = condition_bounds(np.eye(5))
    assert rep.b == 0 and rep.rho_lower == 1 and rep.rho_actual == pytest.approx(1)


def test_bounds_sound_on_random_kernels(rng):
    from reskern.multisphere import multisphere_kernels

    for L, alpha in [(2, 1.0), (5, 0.5), (12, 1.0)]:
        points = uniform_multisphere(20, 3, 6, rng)
        p = KernelParams(L=L, d=6, alpha=alpha, head="Tr")
        a = gram(points, lambda t: multisphere_kernels(t, p)["gpk_bar"])
        for uniform in (False, True):
            rep = condition_bounds(a, uniform)
            assert rep.rho_lower <= rep.rho_actual + 1e-9
            if rep.valid_upper:
                assert rep.rho_actual <= rep.rho_upper + 1e-9
    near = DoubleConstant(0.3, 8).matrix()
    near[0, 1] = near[1, 0] = 0.32
    rep = condition_bounds(near)
    assert rep.valid_upper and rep.rho_lower <= rep.rho_actual <= rep.rho_upper


def test_depth_sweep_matches_direct_gram(rng):
    points = uniform_multisphere(12, 3, 5, rng)
    p = KernelParams(L=1, d=5, head="Tr")
    rows = depth_sweep(points, [2, 4], p)
    assert [(L, kind) for L, kind, _ in rows] == [
        (2, "ResCGPK"), (2, "CGPK"), (4, "ResCGPK"), (4, "CGPK")]
    from reskern.multisphere import multisphere_kernels

    a = gram(points, lambda t: multisphere_kernels(t, p.with_(L=4, skip=False))["gpk_bar"])
    direct = condition_bounds(a, True)
    assert rows[3][2].rho_actual == pytest.approx(direct.rho_actual, rel=1e-10)
    assert rows[3][2].l1_gap == pytest.approx(direct.l1_gap, rel=1e-12)
    with pytest.raises(ValueError):
        depth_sweep(points, [0, 2], p)


def test_depth_sweep_trends():
    points = uniform_multisphere(100, 3, 8, np.random.default_rng(0))
    rows = depth_sweep(points, range(5, 31), KernelParams(L=1, d=8, head="Tr"))
    for kind in ("ResCGPK", "CGPK"):
        reps = [r for _, k, r in rows if k == kind]
        gaps = [r.l1_gap for r in reps]
        lower = [r.rho_lower for r in reps]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert all(a < b for a, b in zip(lower, lower[1:]))
    res = {L: r for L, k, r in rows if k == "ResCGPK"}
    plain = {L: r for L, k, r in rows if k == "CGPK"}
    assert all(res[L].rho_lower < plain[L].rho_lower for L in res)
