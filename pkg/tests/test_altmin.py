import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dps_hybrid import altmin
from dps_hybrid.altmin import (decomposition_error, design_hybrid_combiner,
                               exact_decompose_single_carrier, lasso_altmin, normalize_power,
                               opp_digital_update, project_modulus, solve_analog_oracle)
from dps_hybrid.channel import generate_channel_set
from dps_hybrid.config import DESK
from dps_hybrid.digital import bd_fully_digital
from dps_hybrid.errors import NonConvergence, RankDeficient, ZeroMatrix, ZeroProduct
from dps_hybrid.omp import build_dictionary, omp_hybrid

from conftest import crandn, semi_orthogonal_rows


# --------------------------------------------------------------------------
# independent oracles
# --------------------------------------------------------------------------
def grid_projection(z, bound=2.0, passes=3, n=100):
    """argmin_{|w| <= bound} |w - z| by coarse-to-fine (modulus, phase) grids."""
    r_lo, r_hi, p_lo, p_hi = 0.0, bound, -np.pi, np.pi
    best = 0.0
    for _ in range(passes):
        radii = np.linspace(r_lo, r_hi, n)
        phases = np.linspace(p_lo, p_hi, n)
        cand = radii[:, None] * np.exp(1j * phases[None, :])
        i, j = np.unravel_index(np.argmin(np.abs(cand - z)), cand.shape)
        best = cand[i, j]
        dr, dp = (r_hi - r_lo) / (n - 1), (p_hi - p_lo) / (n - 1)
        r_lo, r_hi = max(radii[i] - dr, 0.0), min(radii[i] + dr, bound)
        p_lo, p_hi = phases[j] - dp, phases[j] + dp
    return best


def interior_point_analog(F_opt, F_BB, bound=2.0):
    X = cp.Variable((F_opt.shape[0], F_BB.shape[0]), complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm(F_opt - X @ F_BB, "fro")), [cp.abs(X) <= bound])
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return X.value, prob.value


def stiefel_rows_oracle(F_opt, F_RF, rng, restarts=100, iters=400):
    """Best row-orthonormal F_BB by Riemannian gradient descent with random restarts."""
    n_rf, m = F_RF.shape[1], F_opt.shape[1]
    step = 0.5 / np.linalg.norm(F_RF, 2) ** 2
    best_val, best = np.inf, None
    for _ in range(restarts):
        Y, _ = np.linalg.qr(crandn(rng, m, n_rf))          # Y = F_BB^H, orthonormal columns
        for _ in range(iters):
            R = F_opt - F_RF @ Y.conj().T
            G = -(R.conj().T @ F_RF)                          # Euclidean gradient w.r.t. Y
            sym = Y.conj().T @ G
            xi = G - Y @ (0.5 * (sym + sym.conj().T))
            Q, Rq = np.linalg.qr(Y - step * xi)
            Y = Q * np.sign(np.real(np.diag(Rq)))
        val = decomposition_error(F_opt, F_RF, Y.conj().T)
        if val < best_val:
            best_val, best = val, Y.conj().T
    return best, best_val


# --------------------------------------------------------------------------
# project_modulus
# --------------------------------------------------------------------------
def test_project_modulus_clips():
    z = 3 * np.exp(1j * np.pi / 4)
    assert project_modulus(np.array([z]))[0] == pytest.approx(2 * np.exp(1j * np.pi / 4))


def test_project_modulus_feasible_fixed_point():
    assert project_modulus(np.array([1 + 1j]))[0] == 1 + 1j
    assert project_modulus(np.zeros(3))[1] == 0


def test_project_modulus_matches_shrinkage_form(rng):
    Z = 3 * crandn(rng, 6, 4)
    shrink = Z - np.exp(1j * np.angle(Z)) * np.maximum(np.abs(Z) - 2, 0)
    np.testing.assert_allclose(project_modulus(Z), shrink, atol=1e-14)


def test_project_modulus_against_grid_search(rng):
    Z = 2.5 * crandn(rng, 6, 4)
    P = project_modulus(Z)
    for z, p in zip(Z.ravel(), P.ravel()):
        assert abs(grid_projection(z) - p) < 1e-3


complex_entries = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@given(arrays(np.complex128, (3, 4), elements=complex_entries), st.floats(0.1, 5.0))
def test_project_modulus_properties(Z, bound):
    P = project_modulus(Z, bound)
    assert np.all(np.abs(P) <= bound * (1 + 1e-12))
    np.testing.assert_allclose(project_modulus(P, bound), P)
    inside = np.abs(Z) <= bound
    np.testing.assert_array_equal(P[inside], Z[inside])


# --------------------------------------------------------------------------
# analog subproblem: closed form vs. projected-gradient oracle vs. interior point
# --------------------------------------------------------------------------
def test_oracle_identity_digital(rng):
    F_opt = 3 * crandn(rng, 6, 4)
    np.testing.assert_allclose(solve_analog_oracle(F_opt, np.eye(4)), project_modulus(F_opt),
                               atol=1e-9)


@pytest.mark.parametrize("scale", [0.5, 3.0, 10.0])
def test_closed_form_matches_oracle_for_semi_orthogonal(rng, scale):
    F_opt = scale * crandn(rng, 6, 8)
    F_BB = semi_orthogonal_rows(rng, 4, 8)
    closed = project_modulus(F_opt @ F_BB.conj().T)
    assert np.linalg.norm(solve_analog_oracle(F_opt, F_BB) - closed) < 1e-6


def test_oracle_attains_convex_minimum_for_general_digital(rng):
    F_opt = 4 * crandn(rng, 6, 8)
    F_BB = crandn(rng, 4, 8)
    X = solve_analog_oracle(F_opt, F_BB)
    assert np.all(np.abs(X) <= 2 + 1e-12)
    ours = decomposition_error(F_opt, X, F_BB)
    _, ipm = interior_point_analog(F_opt, F_BB)
    assert ours <= ipm + 1e-6
    assert ipm <= ours + 1e-5
    # the naive clipped least-squares guess is no better than the optimum
    ls = project_modulus(F_opt @ F_BB.conj().T @ np.linalg.inv(F_BB @ F_BB.conj().T))
    assert ours <= decomposition_error(F_opt, ls, F_BB) + 1e-9


def test_closed_form_is_block_optimal_against_interior_point(rng):
    F_opt = 5 * crandn(rng, 6, 8)
    F_BB = semi_orthogonal_rows(rng, 4, 8)
    X, val = interior_point_analog(F_opt, F_BB)
    closed = project_modulus(F_opt @ F_BB.conj().T)
    assert decomposition_error(F_opt, closed, F_BB) <= val + 1e-6
    assert np.linalg.norm(X - closed) < 1e-4


def test_oracle_nonconvergence(rng):
    with pytest.raises(NonConvergence):
        solve_analog_oracle(5 * crandn(rng, 6, 8), crandn(rng, 4, 8), max_iter=2)


def test_orthogonality_identity(rng):
    for _ in range(20):
        F_opt = 3 * crandn(rng, 10, 12)
        F_BB = semi_orthogonal_rows(rng, 4, 12)
        F_RF = project_modulus(crandn(rng, 10, 4) * 3)
        lhs = decomposition_error(F_opt, F_RF, F_BB) ** 2
        C = F_opt @ F_BB.conj().T
        rhs = (np.linalg.norm(F_RF - C) ** 2 + np.linalg.norm(F_opt) ** 2
               - np.linalg.norm(C) ** 2)
        assert abs(lhs - rhs) < 1e-9 * np.linalg.norm(F_opt) ** 2


# --------------------------------------------------------------------------
# Procrustes step
# --------------------------------------------------------------------------
def test_opp_exact_factorization():
    Q, _ = np.linalg.qr(crandn(np.random.default_rng(0), 12, 12))
    F_opt = Q[:, :6]
    F_BB = opp_digital_update(F_opt, F_opt)
    np.testing.assert_allclose(F_BB, np.eye(6), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(0, 8))
def test_opp_rows_orthonormal(seed, n_rf, extra):
    r = np.random.default_rng(seed)
    F_BB = opp_digital_update(crandn(r, 16, n_rf + extra), crandn(r, 16, n_rf))
    assert np.linalg.norm(F_BB @ F_BB.conj().T - np.eye(n_rf)) < 1e-10


def test_opp_matches_manifold_oracle(rng):
    F_opt = crandn(rng, 16, 12)
    F_RF = project_modulus(2 * crandn(rng, 16, 4))
    F_BB = opp_digital_update(F_opt, F_RF)
    _, best = stiefel_rows_oracle(F_opt, F_RF, rng)
    ours = decomposition_error(F_opt, F_RF, F_BB)
    assert ours <= best + 1e-5
    assert abs(ours - best) < 1e-5


def test_opp_rank_deficient():
    F_RF = np.zeros((8, 3), dtype=complex)
    F_RF[:, 0] = 1
    with pytest.raises(RankDeficient):
        opp_digital_update(np.ones((8, 6), dtype=complex), F_RF)


# --------------------------------------------------------------------------
# AltMin driver
# --------------------------------------------------------------------------
def _desk_target(seed, **changes):
    cfg = DESK.replace(**changes)
    cs = generate_channel_set(cfg, np.random.default_rng(seed))
    return bd_fully_digital(cs, cfg), cfg


def test_altmin_single_carrier_reaches_exact_decomposition():
    fd, cfg = _desk_target(7, n_subcarriers=1)
    F_opt = fd.F_opt
    _, _, hist = lasso_altmin(F_opt, cfg.n_users * cfg.n_streams, np.random.default_rng(1))
    assert hist.objective[-1] < 1e-8 * np.linalg.norm(F_opt)


def test_altmin_single_carrier_with_clipping_active():
    # scaled-up target so every unclipped entry would violate the bound
    fd, cfg = _desk_target(8, n_subcarriers=1)
    F_opt = 40 * fd.F_opt
    F_RF, F_BB, hist = lasso_altmin(F_opt, 4, np.random.default_rng(2), tol=1e-10, max_iter=5000)
    assert np.all(np.abs(F_RF) <= 2 + 1e-12)
    assert np.all(np.diff(hist.objective) <= 1e-12 * hist.objective[0])


def test_altmin_monotone_and_feasible(monkeypatch):
    fd, cfg = _desk_target(3)
    seen = []
    original = altmin.opp_digital_update

    def recording(F_opt, F_RF, *a, **kw):
        F_BB = original(F_opt, F_RF, *a, **kw)
        seen.append(np.linalg.norm(F_BB @ F_BB.conj().T - np.eye(F_BB.shape[0])))
        return F_BB

    monkeypatch.setattr(altmin, "opp_digital_update", recording)
    F_RF, F_BB, hist = lasso_altmin(fd.F_opt, 4, np.random.default_rng(0), tol=1e-9)
    assert seen and max(seen) < 1e-10
    assert np.all(np.diff(hist.objective) <= 1e-12 * hist.objective[0])
    assert np.all(np.abs(F_RF) <= 2)
    assert hist.reason in ("tolerance", "max_iter")


def test_altmin_max_iter_reason():
    fd, _ = _desk_target(3)
    _, _, hist = lasso_altmin(fd.F_opt, 4, np.random.default_rng(0), tol=0.0, max_iter=3)
    assert hist.reason == "max_iter" and hist.iterations == 3


def test_altmin_beats_omp_on_average():
    diffs = []
    dictionary = build_dictionary(32, 64)
    for seed in range(50):
        fd, _ = _desk_target(1000 + seed)
        _, _, hist = lasso_altmin(fd.F_opt, 4, np.random.default_rng(seed))
        F_RF, F_BB, _ = omp_hybrid(fd.F_opt, dictionary, 4)
        diffs.append(decomposition_error(fd.F_opt, F_RF, F_BB) - hist.objective[-1])
    assert np.mean(diffs) > 0


def test_restarts_exhausted(monkeypatch):
    def always_deficient(*a, **kw):
        raise RankDeficient("forced")

    monkeypatch.setattr(altmin, "opp_digital_update", always_deficient)
    with pytest.raises(RankDeficient):
        lasso_altmin(np.ones((4, 4), dtype=complex), 2, np.random.default_rng(0))


# --------------------------------------------------------------------------
# single-carrier exact decomposition, power normalization, combiner
# --------------------------------------------------------------------------
def test_exact_decomposition_scaling():
    F_opt = np.full((4, 2), 0.1, dtype=complex)
    F_opt[0, 0] = 0.5
    F_RF, F_BB = exact_decompose_single_carrier(F_opt)
    np.testing.assert_allclose(F_BB, 0.25 * np.eye(2))
    np.testing.assert_allclose(F_RF, 4 * F_opt)
    assert np.max(np.abs(F_RF)) == pytest.approx(2.0)


def test_exact_decomposition_random(rng):
    for _ in range(10):
        F_opt = crandn(rng, 32, 4) * rng.uniform(0.01, 10)
        F_RF, F_BB = exact_decompose_single_carrier(F_opt)
        assert np.linalg.norm(F_opt - F_RF @ F_BB) < 1e-12 * np.linalg.norm(F_opt)
        assert np.all(np.abs(F_RF) <= 2 + 1e-12)


def test_exact_decomposition_zero():
    with pytest.raises(ZeroMatrix):
        exact_decompose_single_carrier(np.zeros((3, 2)))


def test_normalize_power_scales_down(rng):
    F_RF = crandn(rng, 8, 4)
    F_B = crandn(rng, 4, 6)
    power = np.linalg.norm(F_RF @ F_B) ** 2
    out = normalize_power(F_RF, F_B, power / 2)
    np.testing.assert_allclose(out, F_B / np.sqrt(2))


def test_normalize_power_conditional_noop(rng):
    F_RF = crandn(rng, 8, 4)
    F_B = crandn(rng, 4, 6)
    power = np.linalg.norm(F_RF @ F_B) ** 2
    assert normalize_power(F_RF, F_B, power) is F_B
    assert normalize_power(F_RF, F_B, 2 * power) is F_B
    forced = normalize_power(F_RF, F_B, 2 * power, only_if_exceeded=False)
    assert np.linalg.norm(F_RF @ forced) ** 2 == pytest.approx(2 * power, rel=1e-12)


def test_normalize_power_blocks_and_zero(rng):
    F_RF = crandn(rng, 8, 4)
    blocks = crandn(rng, 2, 3, 4, 2)
    out = normalize_power(F_RF, blocks, 12.0, only_if_exceeded=False)
    assert np.sum(np.abs(F_RF @ out) ** 2) == pytest.approx(12.0, rel=1e-12)
    with pytest.raises(ZeroProduct):
        normalize_power(F_RF, np.zeros((4, 3)), 1.0)


def test_combiner_single_carrier_exact():
    fd, cfg = _desk_target(12, n_subcarriers=1)
    W = fd.user_combiner_target(0)
    W_RF, W_BB, hist = design_hybrid_combiner(W, cfg.n_streams, np.random.default_rng(0))
    assert np.linalg.norm(W - W_RF @ W_BB) < 1e-10
    assert np.all(np.abs(W_RF) <= 2)


def test_combiner_multicarrier():
    fd, cfg = _desk_target(13)
    W_RF, W_BB, hist = design_hybrid_combiner(fd.user_combiner_target(1), 2,
                                              np.random.default_rng(0))
    assert W_RF.shape == (4, 2) and W_BB.shape == (2, 16)
    assert np.all(np.abs(W_RF) <= 2)
    assert np.all(np.diff(hist.objective) <= 1e-12 * hist.objective[0])
