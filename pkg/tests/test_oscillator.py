import math
import warnings

import numpy as np
import pytest

from magdeform.errors import InvalidArgumentError, SingularPhaseError
from magdeform.numerics import gauss_legendre
from magdeform.oscillator import (
    HOConfig,
    OutOfBandWarning,
    averaged_intensity_ho,
    build_ho_operator,
    coherent_oracle,
    conjugated_operator_check,
    deform_ground_state,
    eigen_residual,
    ho_ground_state,
    limit_intensity,
    mehler_phase_eval,
    mehler_propagate,
    propagate_spectral,
    sup_statistics,
)


def _cfg(hbar, count=512, **kw):
    return HOConfig(hbar, count=count, **kw)


# ----------------------------------------------------------------- config


@pytest.mark.parametrize("kw", [dict(t0=0.0), dict(t0=1.5), dict(epsilon=-1.0), dict(half_width=5.0)])
def test_config_preconditions(kw):
    with pytest.raises(InvalidArgumentError):
        HOConfig(0.1, **kw)


def test_band_edge():
    assert _cfg(0.1).band_edge == pytest.approx(0.8 * 0.5 * math.sin(0.5))


# ---------------------------------------------------------- ground state


def test_ground_state_peak_and_norm():
    cfg = _cfg(0.05)
    phi = ho_ground_state(cfg)
    assert phi.values[cfg.count // 2] == pytest.approx((math.pi * 0.05) ** -0.25)
    assert phi.l2_norm() == pytest.approx(1.0, abs=1e-8)


def test_ground_state_unit_peak_at_hbar_one_over_pi():
    cfg = _cfg(1 / math.pi)
    assert ho_ground_state(cfg).values[cfg.count // 2] == pytest.approx(1.0, abs=1e-15)


# -------------------------------------------------------------- operator


@pytest.mark.parametrize("basis", ["position", "momentum"])
def test_ground_state_residual(basis):
    cfg = _cfg(0.1, count=256)
    op = build_ho_operator(cfg, 0.0, basis=basis)
    assert eigen_residual(op, ho_ground_state(cfg), cfg.energy) <= 1e-6


def test_lowest_eigenvalue():
    cfg = _cfg(0.1, count=256)
    vals, _ = build_ho_operator(cfg, 0.0, basis="momentum").eigh(5)
    assert vals[0] == pytest.approx(0.05, abs=1e-6)
    assert np.allclose(vals, 0.1 * (np.arange(5) + 0.5), atol=1e-10)


@pytest.mark.parametrize("u,count", [(0.25, 256), (-0.4, 256), (1.0, 1024)])
def test_spectrum_gauge_invariant(u, count):
    # the shift must stay well inside the grid's momentum range
    cfg = _cfg(0.05, count=count)
    v0, _ = build_ho_operator(cfg, 0.0, basis="momentum").eigh(12)
    vu, _ = build_ho_operator(cfg, u, basis="momentum").eigh(12)
    assert np.max(np.abs(vu - v0)) <= 1e-8


def test_bases_describe_same_operator():
    cfg = _cfg(0.1, count=64)
    pos = build_ho_operator(cfg, 0.3, basis="position").matrix
    mom = build_ho_operator(cfg, 0.3, basis="momentum").position_matrix()
    assert np.max(np.abs(pos - mom)) <= 1e-10 * np.max(np.abs(pos))


def test_unknown_basis():
    with pytest.raises(InvalidArgumentError):
        build_ho_operator(_cfg(0.1, count=64), 0.0, basis="spin")


# ------------------------------------------------------------ propagation


def test_zero_time_is_identity():
    cfg = _cfg(0.1, count=256)
    phi = ho_ground_state(cfg)
    shifted = phi.with_values(phi.values * np.exp(1j * 0.3 * cfg.grid.nodes / cfg.hbar))
    out = propagate_spectral(build_ho_operator(cfg, 0.2, basis="momentum"), shifted, 0.0)
    assert np.max(np.abs(out.values - shifted.values)) <= 1e-10


def test_stationary_ground_state():
    cfg = _cfg(0.05, count=512)
    phi = ho_ground_state(cfg)
    out = propagate_spectral(build_ho_operator(cfg, 0.0, basis="momentum"), phi, cfg.t0, n_states="auto")
    phase = np.exp(-1j * cfg.t0 * cfg.energy / cfg.hbar)
    assert np.max(np.abs(out.values - phase * phi.values)) <= 1e-8


def test_propagation_matches_coherent_oracle():
    cfg = _cfg(0.05, count=1024)
    row = deform_ground_state(cfg, [0.25])[0]
    oracle = coherent_oracle(cfg.hbar, cfg.t0, 0.25, cfg.grid.nodes)
    assert np.max(np.abs(np.abs(row) - oracle)) <= 1e-6 * oracle.max()


def test_propagation_is_unitary():
    cfg = _cfg(0.1, count=128)
    vals, vecs = build_ho_operator(cfg, 0.3, basis="position").eigh()
    prop = (vecs * np.exp(-1j * cfg.t0 * vals / cfg.hbar)) @ vecs.conj().T
    assert np.max(np.abs(prop.conj().T @ prop - np.eye(128))) <= 1e-10


def test_parity_shortcut_is_consistent():
    cfg = _cfg(0.05, count=512)
    nodes = [-0.3, 0.1, 0.3]
    fast = deform_ground_state(cfg, nodes)
    slow = deform_ground_state(cfg, nodes, use_parity=False)
    assert np.max(np.abs(fast - slow)) <= 1e-11


# ----------------------------------------------------------------- Mehler


def test_mehler_phase_at_time_zero():
    x, eta = np.array([0.3, -1.2]), np.array([0.7, 2.0])
    assert np.allclose(mehler_phase_eval(0.0, x, eta, 0.4), x * eta)


def test_mehler_phase_values():
    assert mehler_phase_eval(0.5, 0.0, 0.0, 0.0) == 0.0
    # 50-digit evaluation of the closed form at (t, x, eta, u) = (0.5, 0.2, 0.1, 0.3)
    assert mehler_phase_eval(0.5, 0.2, 0.1, 0.3) == pytest.approx(-0.0074318566867335854227, rel=1e-13)


def test_mehler_phase_singular():
    with pytest.raises(SingularPhaseError):
        mehler_phase_eval(math.pi / 2, 0.0, 0.0, 0.0)


def test_mehler_matches_spectral():
    cfg = _cfg(0.05, count=1024)
    row = deform_ground_state(cfg, [0.25])[0]
    val = mehler_propagate(cfg, 0.25, 0.0)
    assert abs(abs(val) - abs(row[cfg.count // 2])) <= 1e-6 * abs(row[cfg.count // 2])


def test_mehler_undeformed_is_ground_state():
    cfg = _cfg(0.05)
    x = np.linspace(-0.6, 0.6, 13)
    vals = mehler_propagate(cfg, 0.0, x)
    exact = (math.pi * 0.05) ** -0.25 * np.exp(-(x**2) / 0.1)
    assert np.max(np.abs(np.abs(vals) - exact)) <= 1e-8


def test_mehler_peak_tracks_coherent_centre():
    cfg = _cfg(0.05)
    u = 0.25
    x = -u * math.sin(cfg.t0) + np.linspace(-0.2, 0.2, 41)
    mod = np.abs(mehler_propagate(cfg, u, x))
    assert int(np.argmax(mod)) == 20


# ----------------------------------------------------------------- oracle


def test_coherent_oracle():
    assert np.allclose(coherent_oracle(0.05, 0.5, 0.0, [0.0, 0.1]),
                       (math.pi * 0.05) ** -0.25 * np.exp(-np.array([0.0, 0.01]) / 0.1))
    peak = coherent_oracle(0.05, 0.5, 0.25, -0.25 * math.sin(0.5))
    assert peak == pytest.approx((math.pi * 0.05) ** -0.25, rel=1e-15)


def test_sup_norm_independent_of_u():
    cfg = _cfg(0.02, count=1024)
    rows = deform_ground_state(cfg, [-0.4, 0.0, 0.2])
    assert np.allclose(np.abs(rows).max(axis=1), (math.pi * 0.02) ** -0.25, rtol=1e-2)


# -------------------------------------------------------------- averages


def test_average_matches_coherent_closed_form():
    # I(x=0) from the coherent modulus: erf(eps sin t0 / sqrt(hbar)) / sin t0
    cfg = _cfg(0.02, count=1024)
    quad = gauss_legendre(24, -0.5, 0.5)
    prof = averaged_intensity_ho(cfg, 0.0, quad)
    assert prof.values[0] == pytest.approx(2.051363051747935, rel=0.02)
    assert prof.values[0] == pytest.approx(2.051363051747935, rel=1e-9)


def test_average_of_zero_input():
    cfg = _cfg(0.1, count=256)
    quad = gauss_legendre(8, -0.5, 0.5)
    prof = averaged_intensity_ho(cfg, [0.0, 0.1], quad, deformed=np.zeros((8, 256)))
    assert np.all(prof.values == 0)


def test_out_of_band_warning():
    cfg = _cfg(0.1, count=256)
    quad = gauss_legendre(8, -0.5, 0.5)
    with pytest.warns(OutOfBandWarning):
        prof = averaged_intensity_ho(cfg, [0.0, 0.5], quad)
    assert prof.in_band.tolist() == [True, False]


def test_limit_value():
    assert limit_intensity(0.5) == pytest.approx(2.0858296429334878)


def test_sup_statistics_consistency():
    cfgs = [_cfg(h, count=512) for h in (0.08, 0.04, 0.02)]
    stats = sup_statistics(cfgs, 16)
    quad = gauss_legendre(16, -0.5, 0.5)
    for cfg, sup in zip(cfgs, stats.sup_of_average):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert sup >= averaged_intensity_ho(cfg, 0.0, quad).values[0] - 1e-12
    exact = 2 * 0.5 * (math.pi * stats.hbar) ** -0.5
    assert np.allclose(stats.average_of_sup, exact, rtol=1e-5)
    assert stats.slope == pytest.approx(-0.5, abs=1e-3)


# --------------------------------------------------------- conjugated Q_u


def test_conjugated_operator_at_zero_matches_eigen_residual():
    cfg = _cfg(0.1, count=128)
    res, herm = conjugated_operator_check(cfg, 0.0)
    op = build_ho_operator(cfg, 0.0)
    phi = ho_ground_state(cfg)
    plain = np.linalg.norm(op.apply(phi.values) - cfg.energy * phi.values) * math.sqrt(cfg.grid.spacing)
    assert res == pytest.approx(plain, abs=1e-12)


def test_conjugated_operator_residual():
    cfg = _cfg(0.05, count=256)
    res, herm = conjugated_operator_check(cfg, 0.25)
    assert res <= 1e-6
    assert herm <= 1e-9
