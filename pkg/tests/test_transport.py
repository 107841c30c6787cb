import numpy as np
import pytest

from kraichnan.flows import FlowParams, FrozenFlow, ModeTable, build_piecewise_flow, steady_flow
from kraichnan.spectrum import SpectrumConfig, SpectrumError
from kraichnan.transport import (
    Advection,
    SpectralGrid,
    SweepTable,
    TransportError,
    advect_diffuse,
    cosine_initial,
    dissipation_sweep,
    energy_gap_witness,
    mc_energy,
    retained_kmax,
    run_ensemble,
)


def _xy(n):
    x = 2 * np.pi * np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def test_retained_kmax():
    assert retained_kmax(64) == 21
    assert retained_kmax(128) == 42
    assert retained_kmax(256) == 85


def test_grid_energy_and_mean():
    n = 32
    g = SpectralGrid(n)
    X, Y = _xy(n)
    th = 0.3 + np.cos(X) + 2 * np.sin(3 * Y)
    F = g.forward(th)
    np.testing.assert_allclose(g.backward(F), th, atol=1e-13)
    energy = np.sum(th**2) * (2 * np.pi / n) ** 2
    assert g.energy(F) == pytest.approx(energy, rel=1e-13)
    assert g.mean(F) == pytest.approx(0.3, rel=1e-13)


def test_chebyshev_matches_rk4():
    n = 32
    X, Y = _xy(n)
    u = np.stack([np.sin(Y), np.cos(2 * X)])
    grid = SpectralGrid(n)
    adv = Advection(grid, u)
    F = grid.forward(np.cos(X) * np.sin(Y))
    np.testing.assert_allclose(adv.chebyshev(F, 0.3), adv.rk4(F, 0.3, cfl=0.05), atol=1e-8 * np.abs(F).max())


def test_rk4_cap():
    n = 16
    X, Y = _xy(n)
    adv = Advection(SpectralGrid(n), np.stack([100 * np.sin(Y), 0 * X]))
    with pytest.raises(TransportError):
        adv.rk4(adv.g.forward(np.cos(X)), 1.0, max_substeps=3)


# ------------------------------------------------------------ single runs


def test_pure_heat():
    n = 32
    flow = steady_flow(np.zeros((2, n, n)), 2.0)
    run = advect_diffuse(cosine_initial(n), flow, [0.1, 0.01], 2.0, dt=0.1)
    expected = run.energy[0][None] * np.exp(-2 * run.kappa[None] * run.t[:, None])
    np.testing.assert_allclose(run.energy, expected, rtol=1e-6)


def test_shear_characteristics():
    n, T = 256, 1.0
    X, Y = _xy(n)
    flow = steady_flow(np.stack([np.sin(Y), np.zeros_like(Y)]), T)
    run = advect_diffuse(np.cos(X), flow, 0.0, T, dt=0.1)
    assert np.abs(run.final[0] - np.cos(X - T * np.sin(Y))).max() < 1e-3


def test_smooth_shear_conserves_energy():
    n, T = 256, 1.0
    X, Y = _xy(n)
    flow = steady_flow(np.stack([np.sin(Y), np.zeros_like(Y)]), T)
    run = advect_diffuse(np.cos(X) + 0.5 * np.sin(2 * Y), flow, 0.0, T, dt=0.05)
    assert abs(run.energy[-1, 0] / run.energy[0, 0] - 1) < 1e-4


@pytest.mark.parametrize("model", ["white_kraichnan", "oriented_shear", "bounded_shear_drift", "white_shear"])
def test_mean_and_monotone(model):
    p = FlowParams(n=32, alpha=0.75 if model == "bounded_shear_drift" else 0.5, kmax=10)
    flow = build_piecewise_flow(model, p, 0.05, 0.5, 4)
    X, Y = _xy(32)
    run = advect_diffuse(0.2 + np.cos(X) * np.sin(2 * Y), flow, [1e-2, 0.0], 0.5)
    assert np.abs(run.mean - run.mean[0]).max() < 1e-14
    assert np.all(np.diff(run.energy[:, 0]) < 0)
    # kappa = 0: conservation up to the scheme tolerance per step
    assert np.all(np.diff(run.energy[:, 1]) <= 1e-8 * run.energy[0, 1])


def test_seed_determinism():
    p = FlowParams(n=32, kmax=10)
    a = advect_diffuse(cosine_initial(32), build_piecewise_flow("white_kraichnan", p, 0.1, 0.5, 9), 1e-3, 0.5)
    b = advect_diffuse(cosine_initial(32), build_piecewise_flow("white_kraichnan", p, 0.1, 0.5, 9), 1e-3, 0.5)
    assert np.array_equal(a.energy, b.energy)


def test_translation_equivariance():
    n, shift = 32, (5, -3)
    p = FlowParams(n=n, kmax=10)
    f = build_piecewise_flow("white_kraichnan", p, 0.1, 0.5, 2)
    moved = FrozenFlow([np.roll(u, shift, (1, 2)) for u in f.segments], f.eps)
    X, Y = _xy(n)
    th = np.cos(X) + np.sin(X + 2 * Y)
    a = advect_diffuse(th, f, 1e-3, 0.5).final[0]
    b = advect_diffuse(np.roll(th, shift, (0, 1)), moved, 1e-3, 0.5).final[0]
    np.testing.assert_allclose(np.roll(a, shift, (0, 1)), b, atol=1e-12)


def test_strang_second_order():
    # refining dt inside a frozen segment only reduces splitting error, at rate dt^2
    p = FlowParams(n=32, kmax=10)
    f = build_piecewise_flow("oriented_shear", p, 0.2, 0.4, 1)
    sols = [advect_diffuse(cosine_initial(32), f, 1e-2, 0.4, dt=dt).final[0] for dt in (0.1, 0.05, 0.025, 0.0125)]
    diffs = [np.abs(a - b).max() for a, b in zip(sols, sols[1:])]
    assert diffs[0] / diffs[1] > 3.5 and diffs[1] / diffs[2] > 3.5


def test_precondition_errors():
    p = FlowParams(n=32, kmax=10)
    f = build_piecewise_flow("white_kraichnan", p, 0.1, 1.0, 0)
    with pytest.raises(SpectrumError):
        advect_diffuse(cosine_initial(32), f, 1e-3, 1.0, dt=0.03)
    with pytest.raises(SpectrumError):
        advect_diffuse(cosine_initial(32), f, -1.0, 1.0)
    with pytest.raises(SpectrumError):
        advect_diffuse(cosine_initial(32), f, 1e-3, 2.0)
    coarse = build_piecewise_flow("white_kraichnan", FlowParams(n=24, kmax=11), 0.1, 1.0, 0)
    with pytest.raises(SpectrumError):
        advect_diffuse(cosine_initial(24), coarse, 1e-3, 1.0)
    with pytest.raises(TransportError):
        advect_diffuse(np.zeros((16, 16)), f, 1e-3, 1.0)


# ------------------------------------------------------------ ensembles


def test_mc_zero_flow_is_heat():
    p = FlowParams(n=16, kmax=5)
    st = mc_energy("white_kraichnan", p, 0.1, 0.05, cosine_initial(16), 1.0, 3, 0, zero_flow=True)
    assert np.all(st.stderr == 0)
    np.testing.assert_allclose(st.mean_energy[:, 0], 2 * np.pi**2 * np.exp(-0.1 * st.t), rtol=1e-12)


def test_mc_stderr_positive_and_rejects_small():
    p = FlowParams(n=16, kmax=5)
    st = mc_energy("white_kraichnan", p, 0.1, 1e-2, cosine_initial(16), 0.5, 2, 0)
    assert np.all(st.stderr[1:] > 0)
    with pytest.raises(SpectrumError):
        mc_energy("white_kraichnan", p, 0.1, 1e-2, cosine_initial(16), 0.5, 1, 0)
    with pytest.raises(SpectrumError):
        run_ensemble("white_kraichnan", p, 0.1, 1e-2, cosine_initial(16), 0.5, 2, 0, realizations=[3, 3])


def test_parallel_matches_serial():
    p = FlowParams(n=16, kmax=5)
    a = mc_energy("oriented_shear", p, 0.1, 1e-2, cosine_initial(16), 0.3, 3, 7)
    b = mc_energy("oriented_shear", p, 0.1, 1e-2, cosine_initial(16), 0.3, 3, 7, jobs=2)
    assert np.array_equal(a.samples, b.samples)


def test_smooth_mode_kappa_zero_floor():
    table = ModeTable.from_spectrum(SpectrumConfig(alpha=0.5, kmax=8))
    n = 64
    dis = []
    for r in range(4):
        f = build_piecewise_flow("smooth_mode", FlowParams(n=n), 0.1, 1.0, 0, stream=(r,), table=table)
        run = advect_diffuse(cosine_initial(n), f, 0.0, 1.0)
        dis.append(1 - run.energy[-1, 0] / run.energy[0, 0])
    assert max(np.abs(dis)) <= 1e-3


def test_sweep_requires_decreasing():
    with pytest.raises(SpectrumError):
        dissipation_sweep("white_kraichnan", FlowParams(n=16, kmax=5), 0.1, [1e-3, 1e-2], cosine_initial(16),
                          0.2, 2, 0)


def test_sweep_table():
    tab = dissipation_sweep("white_kraichnan", FlowParams(n=16, kmax=5), 0.1, [1e-1, 1e-2, 1e-3],
                            cosine_initial(16), 0.5, 3, 0)
    assert tab.initial_energy == pytest.approx(2 * np.pi**2)
    assert np.all(tab.dissipated > 0)
    assert len(list(tab.rows())) == 3
    np.testing.assert_allclose(tab.dissipated, tab.initial_energy - tab.final_energy, rtol=1e-12)


def _table(d, se=None):
    d = np.asarray(d, float)
    se = np.full(3, 1e-3) if se is None else np.asarray(se, float)
    return SweepTable(np.array([1e-2, 1e-3, 1e-4]), d, se, 1.0, 1.0 - d, se)


def test_gap_witness_verdicts():
    assert energy_gap_witness(_table([0.9, 0.8, 0.75])).verdict == "gap detected"
    rep = energy_gap_witness(_table([0.5, 0.05, 0.005]))
    assert rep.verdict == "gap vanishing" and rep.limit_dissipation < 0.01
    assert energy_gap_witness(_table([0.3, 0.35, 0.2])).verdict == "inconclusive"
    with pytest.raises(SpectrumError):
        energy_gap_witness(SweepTable(np.array([1e-2, 5e-3, 2e-3]), np.ones(3), np.ones(3), 1.0, np.ones(3),
                                      np.ones(3)))
