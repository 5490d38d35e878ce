import math

import numpy as np
import pytest

from magdeform.errors import InvalidArgumentError, ResolutionError
from magdeform.numerics import CircleQuadrature, disk_quadrature
from magdeform.zonal import (
    ZonalConfig,
    averaged_intensity_zonal,
    bessel_j0,
    bessel_oracle,
    deformed_zonal_surrogate,
    legendre_pn,
    local_sup_bound_check,
    surrogate_values,
    zonal_average_limit,
    zonal_laplace_integral,
    zonal_normalization,
    zonal_pole_values,
    zonal_sup_scaling,
)


def test_config_validation():
    assert ZonalConfig(3).hbar == pytest.approx(1 / math.sqrt(12))
    for kw in (dict(degree=0), dict(degree=2.5), dict(degree=10, t0=0.6), dict(degree=10, t0=0.5, epsilon=0.5)):
        with pytest.raises(InvalidArgumentError):
            ZonalConfig(**kw)


# --------------------------------------------------------------- Legendre


def test_legendre_seeds_and_endpoint():
    t = np.linspace(-1, 1, 7)
    assert np.all(legendre_pn(0, t) == 1)
    assert np.allclose(legendre_pn(1, t), t)
    for n in (2, 17, 400):
        assert legendre_pn(n, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_legendre_p5():
    # (63 t^5 - 70 t^3 + 15 t) / 8 at t = 0.3
    assert legendre_pn(5, 0.3) == pytest.approx(0.34538625, abs=1e-15)
    assert zonal_laplace_integral(5, math.acos(0.3)) == pytest.approx(legendre_pn(5, 0.3), abs=1e-10)


def test_legendre_domain():
    with pytest.raises(InvalidArgumentError):
        legendre_pn(3, 1.5)


def test_laplace_integral_examples():
    assert zonal_laplace_integral(7, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert zonal_laplace_integral(1, math.pi / 3) == pytest.approx(0.5, abs=1e-14)
    assert zonal_laplace_integral(50, 0.7) == pytest.approx(legendre_pn(50, math.cos(0.7)), abs=1e-10)


def test_laplace_integral_matches_recurrence_everywhere():
    r = np.linspace(0, math.pi, 31)
    worst = max(np.max(np.abs(zonal_laplace_integral(n, r) - legendre_pn(n, np.cos(r)))) for n in range(0, 401, 7))
    assert worst <= 1e-10


def test_laplace_integral_needs_enough_nodes():
    with pytest.raises(ResolutionError):
        zonal_laplace_integral(50, 0.3, CircleQuadrature(64))


# ------------------------------------------------------------ pole values


def test_pole_value_normalization():
    for n in (3, 40, 333):
        assert zonal_pole_values([n])[0] == pytest.approx(math.sqrt((2 * n + 1) / (4 * math.pi)), rel=1e-14)


def test_pole_slope():
    assert zonal_sup_scaling([10, 20, 40, 80, 160, 320]) == pytest.approx(-0.5, abs=0.01)
    with pytest.raises(InvalidArgumentError):
        zonal_sup_scaling([10, 20, 40])


def test_off_pole_values_stay_bounded():
    degrees = [10, 20, 40, 80, 160, 320]
    vals = zonal_pole_values(degrees, r=1.0)
    assert vals.max() <= 10 * vals[0]


# --------------------------------------------------------------- Bessel


def test_bessel_j0_against_reference_values():
    # J0 at 0, 1, 2.404825557695773 (first zero) and 10
    z = np.array([0.0, 1.0, 2.404825557695773, 10.0])
    ref = np.array([1.0, 0.7651976865579666, 0.0, -0.2459357644513483])
    assert np.allclose(bessel_j0(z), ref, atol=1e-14)


def test_bessel_envelope():
    z = np.linspace(5, 200, 2000)
    assert np.all(np.abs(bessel_j0(z)) <= 1.1 * np.sqrt(2 / (math.pi * z)))


def test_surrogate_at_origin():
    cfg = ZonalConfig(100)
    val = deformed_zonal_surrogate(cfg, np.zeros(2), np.zeros(2), check=True)
    assert abs(val) == pytest.approx(math.sqrt(2 * math.pi / cfg.hbar), rel=1e-12)


def test_surrogate_matches_oracle():
    rng = np.random.default_rng(5)
    for n in (30, 120, 300):
        cfg = ZonalConfig(n)
        r = cfg.epsilon * np.sqrt(rng.random(40))
        a = 2 * math.pi * rng.random(40)
        u = np.column_stack([r * np.cos(a), r * np.sin(a)])
        x = 0.2 * (rng.random((40, 2)) - 0.5)
        vals = np.abs(surrogate_values(cfg, u, x))
        oracle = bessel_oracle(cfg.hbar, cfg.t0, u, x)
        assert np.max(np.abs(vals - oracle)) <= 1e-8 * oracle.max()


def test_surrogate_vanishes_at_bessel_zero():
    cfg = ZonalConfig(200)
    # |2 t0 u| / hbar = first zero of J0
    u = np.array([2.404825557695773 * cfg.hbar / (2 * cfg.t0), 0.0])
    val = deformed_zonal_surrogate(cfg, u, np.zeros(2))
    assert abs(val) <= 1e-8 * math.sqrt(2 * math.pi / cfg.hbar)


def test_surrogate_domain_and_resolution():
    cfg = ZonalConfig(100)
    with pytest.raises(InvalidArgumentError):
        deformed_zonal_surrogate(cfg, np.zeros(2), np.array([0.5, 0.0]))
    with pytest.raises(InvalidArgumentError):
        deformed_zonal_surrogate(cfg, np.array([0.5, 0.0]), np.zeros(2))
    with pytest.raises(ResolutionError):
        deformed_zonal_surrogate(cfg, np.zeros(2), np.zeros(2), quad=CircleQuadrature(16))


def test_phase_shift_does_not_change_modulus():
    cfg = ZonalConfig(80)
    u = np.array([[0.1, -0.2]])
    x = np.array([0.01, 0.02])
    base = surrogate_values(cfg, u, x)[0]
    assert abs(abs(base * np.exp(1j * 0.77)) - abs(base)) <= 1e-14


# -------------------------------------------------------------- averages


def test_average_limit_value():
    assert zonal_average_limit(ZonalConfig(200)) == pytest.approx(8 * math.pi)


def test_averaged_value_matches_bessel_average():
    # exact disk average: (pi R / 2)(J0(R)^2 + J1(R)^2) * 2 pi eps / t0, R = 2 t0 eps / hbar
    cfg = ZonalConfig(190)
    val = averaged_intensity_zonal(cfg, np.zeros(2))
    assert val / zonal_average_limit(cfg) == pytest.approx(0.9815352051043325, rel=1e-9)


def test_undeformed_blows_up_while_average_stays_bounded():
    degrees = [190, 400]
    avgs = [averaged_intensity_zonal(ZonalConfig(n), np.zeros(2)) for n in degrees]
    pole = [2 * math.pi / ZonalConfig(n).hbar for n in degrees]
    hb = [ZonalConfig(n).hbar for n in degrees]
    avg_slope = math.log(avgs[1] / avgs[0]) / math.log(hb[1] / hb[0])
    pole_slope = math.log(pole[1] / pole[0]) / math.log(hb[1] / hb[0])
    assert abs(avg_slope) <= 0.1
    assert pole_slope == pytest.approx(-1.0)


def test_average_rotational_symmetry():
    cfg = ZonalConfig(150)
    r = 0.02
    vals = [averaged_intensity_zonal(cfg, r * np.array([math.cos(a), math.sin(a)])) for a in (0.0, 1.1, 2.5)]
    assert max(vals) - min(vals) <= 1e-6 * max(vals)


def test_average_disk_must_match_epsilon():
    cfg = ZonalConfig(100)
    with pytest.raises(InvalidArgumentError):
        averaged_intensity_zonal(cfg, np.zeros(2), disk_quadrature(0.3))
    with pytest.raises(InvalidArgumentError):
        averaged_intensity_zonal(cfg, np.array([0.1, 0.0]))


# -------------------------------------------------------------- local sup


def test_local_sup_small_compared_with_pole():
    cfg = ZonalConfig(300)
    rep = local_sup_bound_check(cfg, c0=20.0)
    assert rep.sup <= 1.2 * rep.envelope
    assert rep.sup < 0.5 * math.sqrt(2 * math.pi / cfg.hbar)
    assert rep.sup == pytest.approx(rep.oracle_sup, rel=1e-8)


def test_local_sup_without_separation_has_no_envelope():
    rep = local_sup_bound_check(ZonalConfig(100), c0=4.0)
    assert math.isinf(rep.envelope)
    with pytest.raises(InvalidArgumentError):
        local_sup_bound_check(ZonalConfig(100), c0=2.0)
