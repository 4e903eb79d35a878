import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from test_steady_state import hamiltonian

from sfwm.analytic import anti_stokes_response
from sfwm.errors import InternalConsistencyError, PoleEncountered
from sfwm.params import PRESETS, SystemParams
from sfwm.spectral_solver import (
    COHERENCES,
    DiffusionMatrix,
    RelaxationTable,
    build_relaxation_table,
    diffusion_matrix,
    drift_matrix,
    solve_first_order,
    solve_spectrum,
)
from sfwm.steady_state import solve_zeroth_order


def full_drift(p: SystemParams) -> np.ndarray:
    """a[j,k,m,n]: d sigma_jk/dt = sum a * sigma_mn, coherent plus relaxation."""
    a = build_relaxation_table(p.gamma_21).coeff.copy()
    h = hamiltonian(p)
    for j in range(4):
        for k in range(4):
            for x in range(4):
                a[j, k, x, k] += 1j * h[x, j]
                a[j, k, j, x] -= 1j * h[k, x]
    return a


def einstein(a: np.ndarray, e: np.ndarray) -> np.ndarray:
    mean = np.einsum("jkmn,mn->jk", a, e)
    left = np.einsum("jkma,mb->jkab", a, e)
    right = np.einsum("abkn,jn->jkab", a, e)
    return np.einsum("ka,jb->jkab", np.eye(4), mean) - left - right


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_steady_state_is_stationary_under_full_drift(name):
    p = PRESETS[name]
    e = solve_zeroth_order(p).expectation_matrix()
    assert np.abs(np.einsum("jkmn,mn->jk", full_drift(p), e)).max() < 1e-14


@given(dd=st.floats(-30, 30), dc=st.floats(-5, 5), wd=st.floats(0, 5), wc=st.floats(0.1, 10))
def test_diffusion_is_detuning_invariant(dd, dc, wd, wc):
    # coherent terms cancel in the Einstein relation: the full drift gives
    # exactly the relaxation-only result
    p = SystemParams(od=10, omega_d=wd, omega_c=wc, delta_d=dd, delta_c=dc)
    s = solve_zeroth_order(p)
    ours = diffusion_matrix(s, build_relaxation_table(p.gamma_21)).tensor
    full = einstein(full_drift(p), s.expectation_matrix())
    assert np.abs(ours - full).max() < 1e-14


def test_diffusion_hand_values():
    p = SystemParams(od=1, omega_d=0, omega_c=3, delta_d=7, gamma_21=0.02)
    d = diffusion_matrix(solve_zeroth_order(p), build_relaxation_table(p.gamma_21))
    assert d.entry("14", "41") == pytest.approx(1.0, abs=1e-15)
    assert d.entry("13", "31") == pytest.approx(1.0, abs=1e-15)
    assert d.entry("12", "21") == pytest.approx(0.02, abs=1e-15)
    assert d.entry("41", "14") == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_noise_blocks_are_covariances(name):
    p = PRESETS[name]
    for g21 in (0.0, p.gamma_21):
        d = diffusion_matrix(solve_zeroth_order(p), build_relaxation_table(g21))
        for block in (d.stokes_block(), d.anti_stokes_block()):
            assert np.allclose(block, block.conj().T, atol=1e-15)
            # pure ground dephasing is not of Lindblad form; the resulting
            # indefiniteness is tiny and scales with gamma_21
            assert np.linalg.eigvalsh(block).min() >= -1e-3 * g21 - 1e-15


def test_diffusion_rejects_bad_table():
    s = solve_zeroth_order(PRESETS["rabi"])
    with pytest.raises(InternalConsistencyError):
        diffusion_matrix(s, RelaxationTable(np.zeros((3, 3, 3, 3)), 0.0))
    with pytest.raises(InternalConsistencyError):
        DiffusionMatrix(np.zeros((4, 4, 4, 4))).entry("15", "41")


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_residual_small(name):
    p = PRESETS[name]
    spec = solve_spectrum(p, solve_zeroth_order(p), np.linspace(-80, 80, 4001))
    assert spec.residual < 1e-10
    assert not spec.perturbed.any()


def test_grid_matches_pointwise_solve():
    p = PRESETS["bright_od20"]
    s = solve_zeroth_order(p)
    spec = solve_spectrum(p, s, np.linspace(-3, 3, 7))
    for i in range(7):
        pt = solve_first_order(p, s, spec.omega[i])
        assert pt.eps23 == pytest.approx(spec.eps23[i], rel=1e-12)
        assert pt.eta41 == pytest.approx(spec.eta41[i], rel=1e-12)
        assert np.allclose(pt.xi_as, spec.xi_as[i], rtol=1e-12)


def test_no_drive_kills_stokes_source():
    p = SystemParams(od=10, omega_d=0, omega_c=4, delta_d=10)
    spec = solve_spectrum(p, solve_zeroth_order(p), np.linspace(-20, 20, 401))
    assert np.abs(spec.eps23).max() == 0 and np.abs(spec.eps41).max() == 0


@given(wc=st.floats(0.3, 10), dc=st.floats(-5, 5), w=st.floats(-20, 20), od=st.floats(0.1, 100))
def test_anti_stokes_response_is_eit(wc, dc, w, od):
    # without drive and ground decoherence the anti-Stokes self-coupling is
    # the mirrored EIT susceptibility: the conjugate field grows along z at
    # i conj(k L chi)/2, so the backward-travelling photon sees exp(i k L chi / 2)
    p = SystemParams(od=od, omega_d=0, omega_c=wc, delta_d=10, delta_c=dc, gamma_21=0.0)
    pt = solve_first_order(p, solve_zeroth_order(p), w)
    lhs = 1j * od / 4 * pt.eta41
    rhs = 1j * np.conj(anti_stokes_response(p, p.delta_c - w)) / 2
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_eit_transparency_point():
    p = SystemParams(od=15, omega_d=0, omega_c=1, delta_d=10, gamma_21=0.0)
    assert abs(solve_first_order(p, solve_zeroth_order(p), 0.0).eta41) < 1e-15


def test_response_is_continuous():
    p = PRESETS["rabi"]
    w = np.linspace(-10, 10, 20001)
    spec = solve_spectrum(p, solve_zeroth_order(p), w)
    for arr in (spec.eps23, spec.eta23, spec.eps41, spec.eta41):
        jumps = np.abs(np.diff(arr))
        assert jumps.max() < 1e-2 * np.abs(arr).max()


def test_exact_pole():
    p = SystemParams(od=1, omega_d=0, omega_c=0, delta_d=3, gamma_21=0.0)
    with pytest.raises(PoleEncountered) as info:
        solve_first_order(p, solve_zeroth_order(p.with_(omega_c=1)), 0.0)
    assert info.value.name == "pole-encountered"
    spec = solve_spectrum(p, solve_zeroth_order(p.with_(omega_c=1)), np.array([-1.0, 0.0, 1.0]))
    assert spec.perturbed.tolist() == [False, True, False]
    assert spec.omega[1] > 0


def test_drift_layout():
    assert COHERENCES == ("21", "23", "41", "43")
    k0 = drift_matrix(PRESETS["rabi"])
    assert k0.shape == (4, 4)
    assert k0[0, 0] == -PRESETS["rabi"].gamma_21 / 2
