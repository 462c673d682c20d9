import numpy as np
import pytest

from reskern.multisphere import cgpk_appendix_h
from reskern.spectral import (
    QuadratureGrid,
    decay_bounds,
    decay_slope,
    eigenvalue_estimate,
    eigenvalue_table,
    fit_pattern,
    gegenbauer,
    pattern,
    theorem_sandwich_check,
    trace_eigenvalue,
)


def test_gegenbauer_examples():
    assert gegenbauer(0, 0.7, 0.3) == 1.0
    assert gegenbauer(1, 0.5, 0.3) == pytest.approx(0.3, abs=1e-15)
    assert gegenbauer(2, 1.0, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_gegenbauer_recurrence(rng):
    a, t = 0.8, rng.uniform(-1, 1, 5)
    c = [np.ones_like(t), 2 * a * t]
    for n in range(2, 8):
        c.append((2 * t * (n + a - 1) * c[-1] - (n + 2 * a - 2) * c[-2]) / n)
    for n in range(8):
        np.testing.assert_allclose(gegenbauer(n, a, t), c[n], rtol=1e-12, atol=1e-12)


def test_gegenbauer_rejects_nonpositive_order():
    with pytest.raises(ValueError):
        gegenbauer(2, 0.0, 0.1)


@pytest.mark.parametrize("C0", [2, 3, 4, 5])
def test_grid_mass(C0):
    from scipy.integrate import quad
    from scipy.special import beta

    g = QuadratureGrid.build(C0, 20)
    mass = quad(lambda t: (1 - t * t) ** ((C0 - 3) / 2), -1, 1)[0] if C0 > 2 else np.pi
    assert g.weights.sum() == pytest.approx(mass, abs=1e-10)
    assert g.weights.sum() == pytest.approx(beta(0.5, (C0 - 1) / 2), abs=1e-10)
    assert np.all(g.weights > 0) and np.all(np.abs(g.nodes) < 1)
    assert g.geg_order == C0 / 2 - 1


@pytest.mark.parametrize("normalization", ["mercer", "orthonormal"])
@pytest.mark.parametrize("C0", [2, 3])
def test_constant_kernel(C0, normalization):
    g = QuadratureGrid.build(C0, 8)
    const = lambda t: np.ones(t.shape[:-1])
    assert eigenvalue_estimate(const, (0, 0, 0), C0, g, normalization).lam == pytest.approx(1.0)
    assert eigenvalue_estimate(const, (1, 0, 0), C0, g, normalization).lam == pytest.approx(0, abs=1e-14)
    lam, _ = eigenvalue_table(const, 3, C0, 4, 8, normalization)
    assert np.sum(np.abs(lam) > 1e-12) == 1


def test_linear_kernel_on_circle_matches_monte_carlo():
    # C0 = 2: t_i = cos(theta_i) with theta uniform on the torus
    rng = np.random.default_rng(3)
    theta = rng.uniform(0, 2 * np.pi, (10**6, 2))
    g = QuadratureGrid.build(2, 16)
    kernel = lambda t: t[..., 0]

    mercer = eigenvalue_estimate(kernel, (1, 0), 2, g, "mercer").lam
    mc_mercer = np.mean(np.cos(theta[:, 0]) ** 2)
    assert mercer == pytest.approx(0.5, abs=1e-12)
    assert abs(mercer - mc_mercer) < 5 * np.std(np.cos(theta[:, 0]) ** 2) / 1e3

    ortho = eigenvalue_estimate(kernel, (1, 0), 2, g, "orthonormal").lam
    samples = np.sqrt(2) * np.cos(theta[:, 0]) ** 2
    assert ortho == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(ortho - samples.mean()) < 5 * samples.std() / 1e3


def test_estimate_validation():
    g = QuadratureGrid.build(3, 4)
    const = lambda t: np.ones(t.shape[:-1])
    with pytest.raises(ValueError):
        eigenvalue_estimate(const, (4, 0), 3, g)
    with pytest.raises(ValueError):
        eigenvalue_estimate(const, (1, 0), 2, g)
    with pytest.raises(ValueError):
        eigenvalue_table(const, 2, 3, 8, 6)
    with pytest.raises(ValueError):
        g.basis(2, "unit")


def test_table_agrees_with_single_estimate():
    kernel = lambda t: cgpk_appendix_h(t, 2, 1)
    lam, _ = eigenvalue_table(kernel, 3, 3, 4, 12)
    est = eigenvalue_estimate(kernel, (3, 1, 0), 3, QuadratureGrid.build(3, 12))
    assert lam[3, 1, 0] == pytest.approx(est.lam, abs=1e-14)


def test_decay_slope_examples():
    ks = [2, 4, 8, 16]
    fit = decay_slope([(k, k**-3.0) for k in ks])
    assert fit.exponent == pytest.approx(-3.0)
    assert fit.r_squared == pytest.approx(1.0)
    scaled = decay_slope([(k, 7.0 * k**-3.0) for k in ks])
    assert scaled.exponent == pytest.approx(-3.0)
    assert scaled.intercept == pytest.approx(np.log(7.0))


@pytest.mark.parametrize("pairs", [[(1, 1.0), (2, 0.5)], [(1, 1.0), (2, 0.0), (3, 0.1)]])
def test_decay_slope_errors(pairs):
    with pytest.raises(ValueError):
        decay_slope(pairs)


def test_sandwich_examples():
    # C0 + 2 nu - 3 with nu_a = 5/2 and nu_b = 1 + 3/8
    assert decay_bounds(3, "GPK", 1, 4) == pytest.approx((-5.0, -2.75))
    assert theorem_sandwich_check(-5.25, 3, "GPK", 1)
    assert not theorem_sandwich_check(-20, 3, "GPK", 1)
    lo1, hi1 = decay_bounds(3, "NTK", 1, 4)
    lo2, hi2 = decay_bounds(3, "NTK", 2, 4)
    assert (lo2, hi2) == pytest.approx((2 * lo1, 2 * hi1))
    with pytest.raises(ValueError):
        theorem_sandwich_check(-5, 3, "GPK", 0)


@pytest.fixture(scope="module")
def rescgpk_tables():
    kernel = lambda t: cgpk_appendix_h(t, 3, 1)
    return {n: eigenvalue_table(kernel, 4, 3, 10, n) for n in (24, 48)}


def test_single_pixel_eigenvalues_decrease_within_parity(rescgpk_tables):
    # odd frequencies are damped (kappa1 alone has none above k = 1), so the
    # sequence zigzags; each parity class decreases strictly at both resolutions
    for lam, _ in rescgpk_tables.values():
        seq = {k: lam[pattern(1, k, 4)] for k in range(2, 11)}
        for start in (2, 3):
            sub = [seq[k] for k in range(start, 11, 2)]
            assert all(a > b for a, b in zip(sub, sub[1:]))
        assert all(seq[k] > seq[k + 1] for k in range(2, 10, 2))


def test_quadrature_consistency(rescgpk_tables):
    lam24, _ = rescgpk_tables[24]
    lam48, tol48 = rescgpk_tables[48]
    sl = (slice(0, 8),) * 4
    assert np.all(np.abs(lam48[sl] - lam24[sl]) <= 3 * tol48[sl] + 1e-14)


def test_nonnegative(rescgpk_tables):
    lam, tol = rescgpk_tables[48]
    assert np.all(lam >= -tol)


def test_trace_eigenvalue_shift_invariant(rescgpk_tables):
    lam, _ = rescgpk_tables[48]
    k = (3, 1, 0, 2)
    assert trace_eigenvalue(lam, k) == trace_eigenvalue(lam, np.roll(k, 1))
    assert trace_eigenvalue(lam, k) == pytest.approx(np.mean([lam[tuple(np.roll(k, i))]
                                                              for i in range(4)]))


def test_fit_pattern_skips_zeros():
    lam = np.zeros((6,) * 2)
    lam[1:, 0] = np.arange(1, 6) ** -2.0
    rows, fit = fit_pattern(lam, np.zeros_like(lam), 1, range(1, 6), 2)
    assert len(rows) == 5 and fit.exponent == pytest.approx(-2.0)
    _, fit = fit_pattern(lam, np.zeros_like(lam), 2, range(1, 6), 2)
    assert fit is None
