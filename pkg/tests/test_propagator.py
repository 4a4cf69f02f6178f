import math

import numpy as np
import pytest

from core.errors import AliasingError, ConstraintError, InvariantViolation
from harness.initial_data import initial_pair, spectral_bump
from modes.solvers import integrate_direct
from propagator.apply import apply_propagator, evolve, sweep_support
from propagator.checks import pde_residual
from propagator.grid import SpectralGrid
from propagator.norms import (
    k_alpha_half, k_alpha_norm, mode_sum_norm, operator_norm, operator_norm_series, sobolev_norm,
)
from propagator.state import SpectralState
from propagator.sweep import solve_modes
from propagator.symbol import assemble_symbol, singular_values, symbol_entries
from propagator.trace import NormTrace


def bump_state(grid, center=0.0, width=0.25, shift=()):
    hat = spectral_bump(grid, [center], width).astype(np.complex128)
    return SpectralState.from_spectral(grid, hat, 0.5 * hat, momentum_shift=shift)


def gaussian_state(grid):
    x = grid.x_mesh[..., 0]
    phi = np.exp(-x ** 2 / 2).astype(np.complex128)
    return SpectralState(grid, phi, 1j * phi)


# ---- grilla ----

def test_grid_parseval_and_inverse(small_grid):
    rng = np.random.default_rng(7)
    phi = rng.normal(size=small_grid.shape) + 1j * rng.normal(size=small_grid.shape)
    hat = small_grid.forward(phi)
    lhs = np.sum(np.abs(phi) ** 2) * small_grid.cell_volume
    rhs = np.sum(np.abs(hat) ** 2) * small_grid.dual_volume
    assert lhs == pytest.approx(rhs, rel=1e-12)
    np.testing.assert_allclose(small_grid.inverse(hat), phi, atol=1e-12)


def test_grid_transform_of_gaussian(small_grid):
    # la transformada unitaria de e^{-x²/2} es e^{-ξ²/2}
    x = small_grid.x_mesh[..., 0]
    hat = small_grid.forward(np.exp(-x ** 2 / 2))
    xi = small_grid.xi_mesh[..., 0]
    np.testing.assert_allclose(hat, np.exp(-xi ** 2 / 2), atol=1e-12)
    assert small_grid.xi_max == (8.0,)
    assert small_grid.dxi[0] == pytest.approx(1.0 / 16.0)


@pytest.mark.parametrize("half_width, points", [
    ((1.0,), (100,)),
    ((1.0,), (4,)),
    ((0.0,), (64,)),
    ((1.0, 1.0, 1.0), (8, 8, 8)),
])
def test_grid_validation(half_width, points):
    with pytest.raises(ConstraintError):
        SpectralGrid(half_width, points)


# ---- símbolo ----

@pytest.mark.parametrize("alpha", [None, -0.5, 0.0, 0.3])
def test_symbol_is_identity_at_zero(alpha):
    M = symbol_entries(1.0, 0.0, 0.0, 1.0, 5.0, 5.0, alpha)
    np.testing.assert_allclose(M, np.eye(2), atol=1e-15)


@pytest.mark.parametrize("alpha", [-0.4, 0.0, 0.25])
def test_symbol_determinant_is_weight_times_wronskian(linear_disp, alpha):
    traj = integrate_direct(linear_disp, [0.5], 10.0, 1e-10, times=np.linspace(0.0, 10.0, 11))
    sym = assemble_symbol(linear_disp, traj, 10.0, alpha)
    W = traj.wronskian[-1]
    assert abs(sym.det - sym.ell_alpha ** 2 * W) <= 1e-12 * abs(sym.det)
    assert abs(W - 1.0) <= 1e-8
    smax, smin = sym.singular_values
    assert smax * smin == pytest.approx(abs(sym.det), rel=1e-10)


def test_conventions_share_singular_values(linear_disp):
    traj = integrate_direct(linear_disp, [-0.75], 6.0, 1e-10)
    z0, z0p, z1, z1p = traj.state_at(6.0)
    L, L0 = linear_disp.L(6.0, [-0.75]), linear_disp.L0([-0.75])
    standard = singular_values(symbol_entries(z0, z0p, z1, z1p, L, L0, 0.2, "standard"))
    hochstadt = singular_values(symbol_entries(z0, z0p, z1, z1p, L, L0, 0.2, "hochstadt"))
    np.testing.assert_allclose(standard, hochstadt, rtol=1e-13)
    with pytest.raises(ConstraintError):
        symbol_entries(z0, z0p, z1, z1p, L, L0, 0.2, "weyl")


def test_singular_values_of_rotated_diagonal():
    c, s = math.cos(0.7), math.sin(0.7)
    R = np.array([[c, -s], [s, c]])
    M = np.stack([R @ np.diag([3.0, 0.5]), 1j * np.eye(2)])
    smax, smin = singular_values(M)
    np.testing.assert_allclose(smax, [3.0, 1.0], rtol=1e-14)
    np.testing.assert_allclose(smin, [0.5, 1.0], rtol=1e-14)


# ---- aplicación ----

def test_zero_field_preserves_norm(free_disp, small_grid):
    state0 = gaussian_state(small_grid)
    norms = [state.norm() for _, state in evolve(state0, free_disp, [0.0, 10.0, 100.0, 1e3], 0.0)]
    np.testing.assert_allclose(norms, norms[0], rtol=1e-10)


def test_apply_records_momentum_shift(linear_disp, small_grid):
    state = apply_propagator(bump_state(small_grid), linear_disp, 2.0, 0.0)
    assert state.momentum_shift == pytest.approx((2.0,))
    assert state.alpha == 0.0
    assert np.isfinite(state.norm())
    with pytest.raises(ConstraintError):
        apply_propagator(bump_state(small_grid), linear_disp, -1.0, 0.0)


def test_evolve_rejects_gauged_initial_state(linear_disp, small_grid):
    with pytest.raises(ConstraintError) as exc:
        list(evolve(bump_state(small_grid, shift=(1.0,)), linear_disp, [1.0]))
    assert exc.value.key == "state"


def test_aliasing_detected(linear_disp, small_grid):
    with pytest.raises(AliasingError):
        list(evolve(bump_state(small_grid, center=7.0, width=0.5), linear_disp, [1.0]))


def test_gauge_phase_in_position(small_grid):
    near = bump_state(small_grid, shift=(1.0,))
    phi1, _ = near.position(gauge=True)
    np.testing.assert_allclose(np.abs(phi1), np.abs(near.phi1), atol=1e-14)
    far = bump_state(small_grid, shift=(7.0,))
    with pytest.raises(AliasingError):
        far.position(gauge=True)


def test_shared_sweep_matches_fresh_solve(slow_linear_disp, small_grid):
    state0 = bump_state(small_grid)
    times = [0.0, 3.0, 6.0]
    sweep = sweep_support(state0, slow_linear_disp, times)
    fresh = [s.norm() for _, s in evolve(state0, slow_linear_disp, times, 0.2)]
    shared = [s.norm() for _, s in evolve(state0, slow_linear_disp, times, 0.2, sweep=sweep)]
    np.testing.assert_allclose(shared, fresh, rtol=1e-14)

    wide = bump_state(small_grid, width=1.0)
    with pytest.raises(ConstraintError) as exc:
        list(evolve(wide, slow_linear_disp, times, 0.2, sweep=sweep))
    assert exc.value.key == "sweep"
    with pytest.raises(ConstraintError):
        list(evolve(state0, slow_linear_disp, [4.0], 0.2, sweep=sweep))


def test_mode_sum_oracle_agrees_with_fft_path(slow_linear_disp, small_grid):
    state0 = bump_state(small_grid)
    times = [0.0, 5.0, 10.0]
    fft_norms = np.array([s.norm() for _, s in evolve(state0, slow_linear_disp, times, 0.3)])
    oracle = mode_sum_norm(state0, slow_linear_disp, times, 0.3)
    np.testing.assert_allclose(oracle, fft_norms, rtol=1e-7)


# ---- normas ----

def test_operator_norm_free_field_is_one(free_disp):
    series = operator_norm_series(free_disp, [1.0, 10.0, 100.0], 0.0, samples=64, refine=False)
    np.testing.assert_allclose(series.upper, 1.0, rtol=1e-12)
    np.testing.assert_allclose(series.lower, 1.0, rtol=1e-12)
    assert series.window == [(-8.0, 8.0)]


def test_operator_norm_validation(linear_disp):
    assert operator_norm(linear_disp, 0.0, 0.3) == 1.0
    with pytest.raises(ConstraintError) as exc:
        operator_norm_series(linear_disp, [1.0], 0.0, samples=32)
    assert exc.value.key == "operator_norm.samples"
    with pytest.raises(ConstraintError):
        operator_norm_series(linear_disp, [1.0], 0.0, xi_window=[(-1, 1), (-1, 1)], samples=64)


def test_sobolev_weight_uses_physical_momentum(linear_disp, small_grid):
    state = bump_state(small_grid, shift=(2.0,))
    assert sobolev_norm(state, linear_disp, 0.0) == pytest.approx(
        math.sqrt(np.sum(np.abs(state.phi1) ** 2) * small_grid.cell_volume), rel=1e-12)
    hat1, _ = state.spectral()
    L0 = linear_disp.L0(small_grid.xi_mesh + 2.0)
    expected = math.sqrt(np.sum(L0 * np.abs(hat1) ** 2) * small_grid.dual_volume)
    assert sobolev_norm(state, linear_disp, 0.5) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ConstraintError):
        sobolev_norm(state, linear_disp, 0.5, component=3)


def test_k_alpha_norm_positive_polarization(free_disp, small_grid):
    # con ψ̂₀,₁ = Qψ̂₀,₀ y α = 0 ambas componentes de K^{1/2}Ψ valen L^{1/4}ψ̂₀,₀
    psi0 = initial_pair(small_grid, free_disp, np.random.default_rng(0), center=[0.0], width=0.25)
    assert k_alpha_norm(psi0, free_disp, 0.0) == pytest.approx(
        math.sqrt(2.0) * sobolev_norm(psi0, free_disp, 0.25), rel=1e-10)
    phi0 = k_alpha_half(psi0, free_disp, 0.0)
    assert phi0.alpha == 0.0
    back = k_alpha_half(phi0, free_disp, 0.0, "inverse")
    assert back.alpha is None
    np.testing.assert_allclose(back.phi1, psi0.phi1, atol=1e-12)


# ---- chequeos ----

def test_pde_residual_converges_at_second_order(slow_linear_disp):
    coarse = integrate_direct(slow_linear_disp, [0.0], 10.0, 1e-11, times=np.linspace(0.0, 10.0, 1001))
    fine = integrate_direct(slow_linear_disp, [0.0], 10.0, 1e-11, times=np.linspace(0.0, 10.0, 2001))
    ratio = pde_residual(slow_linear_disp, coarse) / pde_residual(slow_linear_disp, fine)
    assert 3.5 < ratio < 4.5


def test_pde_residual_needs_uniform_samples(slow_linear_disp):
    traj = integrate_direct(slow_linear_disp, [0.0], 4.0, 1e-10, times=[0.0, 1.0, 3.0, 4.0])
    with pytest.raises(ConstraintError):
        pde_residual(slow_linear_disp, traj)


def test_norm_trace_validation():
    trace = NormTrace("run", [0.0, 1.0, 2.0])
    trace.add("norm", [1.0, 1.0, 1.0])
    with pytest.raises(InvariantViolation):
        trace.add("short", [1.0, 2.0])
    with pytest.raises(InvariantViolation):
        trace.add("bad", [1.0, np.nan, 1.0])
    with pytest.raises(InvariantViolation):
        NormTrace("run", [0.0, 2.0, 1.0])


def test_sweep_independent_of_workers(slow_linear_disp):
    xis = np.linspace(-1.0, 1.0, 40).reshape(-1, 1)
    single = solve_modes(slow_linear_disp, xis, [2.0, 5.0], workers=1)
    pooled = solve_modes(slow_linear_disp, xis, [2.0, 5.0], workers=2)
    np.testing.assert_array_equal(single.zeta0, pooled.zeta0)
    np.testing.assert_array_equal(single.zeta1_prime, pooled.zeta1_prime)


@pytest.mark.parametrize("alpha", [0.0, 0.25, -0.25])
def test_single_mode_matches_assembled_symbol(small_grid, sqrt_disp, alpha):
    xi = small_grid.xi_axis(0)
    j = int(np.argmin(np.abs(xi - 0.5)))
    coeffs = np.array([1.0 + 0.5j, -0.3 + 0.2j])
    hat1 = np.zeros(small_grid.shape, dtype=np.complex128)
    hat2 = np.zeros(small_grid.shape, dtype=np.complex128)
    hat1[j], hat2[j] = coeffs

    t = 50.0
    out = apply_propagator(SpectralState.from_spectral(small_grid, hat1, hat2), sqrt_disp, t, alpha,
                           tol=1e-10, route="direct")
    traj = integrate_direct(sqrt_disp, [xi[j]], t_end=t, tol=1e-10, times=[t])
    expected = assemble_symbol(sqrt_disp, traj, t, alpha).entries @ coeffs

    out1, out2 = out.spectral()
    np.testing.assert_allclose([out1[j], out2[j]], expected, rtol=0, atol=1e-10)
    others = np.arange(small_grid.shape[0]) != j
    assert np.max(np.abs(out1[others])) < 1e-12
    assert np.max(np.abs(out2[others])) < 1e-12
    assert out.momentum_shift == pytest.approx((math.sqrt(t),))
