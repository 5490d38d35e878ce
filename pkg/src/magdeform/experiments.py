"""Experiment runners behind the command line.

Each runner turns an :class:`~magdeform.report.ExperimentConfig` into an
:class:`~magdeform.report.ExperimentResult`: report rows (one measured value
against its oracle) and a summary of fitted slopes, band ratios and verdicts.
Per-hbar work items are independent; they run in a process pool unless the
caller asks for the serial reference order.
"""

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .deformlab import (
    AverageProfile,
    Curve,
    MagneticFamily,
    admissibility_check,
    fubini_check,
    good_set_fraction,
    restriction_integral,
    two_sided_band,
)
from .errors import DomainTruncationError, InvalidArgumentError, MagDeformError, ResolutionError
from .flatmag import (
    averaged_intensity_flat,
    deformed_values_at,
    gaussian_state,
    motivation_identity_check,
    weyl_quantize_chi,
)
from .numerics import (
    CutoffProfile,
    UniformGrid,
    WaveField,
    disk_quadrature,
    dft_forward,
    gauss_legendre,
    trapezoid_rule,
)
from .oscillator import (
    HOConfig,
    OutOfBandWarning,
    build_ho_operator,
    coherent_oracle,
    conjugated_operator_check,
    deform_ground_state,
    ho_ground_state,
    averaged_intensity_ho,
    limit_intensity,
    mehler_propagate,
    propagate_spectral,
    sup_statistics,
)
from .report import ConfigError, ExperimentResult, ReportRow
from .zonal import (
    ZonalConfig,
    averaged_intensity_zonal,
    bessel_oracle,
    legendre_pn,
    local_sup_bound_check,
    surrogate_values,
    zonal_average_limit,
    zonal_laplace_integral,
    zonal_normalization,
    zonal_pole_values,
    zonal_sup_scaling,
)

__all__ = ["run_experiment", "ho_rows", "clear_cache", "gaussian_line_integral", "FAMILIES"]

log = logging.getLogger(__name__)

_RESOLUTION_ERRORS = (ResolutionError, DomainTruncationError)

# Deformed oscillator states keyed by (HOConfig, node count); shared by the
# average, sup-scaling and restriction runs inside one process.
_HO_CACHE = {}


def clear_cache():
    _HO_CACHE.clear()


def ho_rows(cfg, u_nodes):
    """Cached :func:`deform_ground_state` on a Gauss-Legendre rule over ``[-eps, eps]``."""
    key = (cfg, int(u_nodes))
    if key not in _HO_CACHE:
        quad = gauss_legendre(u_nodes, -cfg.epsilon, cfg.epsilon)
        _HO_CACHE[key] = deform_ground_state(cfg, quad.nodes)
    return _HO_CACHE[key]


def _workers():
    env = os.environ.get("MAGDEFORM_WORKERS")
    return int(env) if env else (os.cpu_count() or 1)


def _map(fn, items, serial):
    items = list(items)
    workers = _workers()
    if serial or workers < 2 or len(items) < 2:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _rel(value, oracle):
    return abs(value - oracle) / max(abs(oracle), 1e-300)


def _status(ok):
    return "ok" if ok else "error:resolution"


def _need_hbar(config):
    if not config.hbar_list:
        raise ConfigError(f"{config.experiment} needs a nonempty hbar_list")


def _ho_config(config, hbar, count=None):
    try:
        return HOConfig(hbar, config.t0, config.epsilon, config.half_width, count or config.grid_count)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc


def _slope(hbar, values):
    return float(np.polyfit(np.log(hbar), np.log(values), 1)[0])


# ---------------------------------------------------------------- flat model


def _flat_task(args):
    config, hbar = args
    grid = UniformGrid(-config.half_width, config.half_width, config.grid_count)
    chi = CutoffProfile(config.chi_inner, config.chi_outer)
    state = gaussian_state(grid, hbar)
    uq = trapezoid_rule(801, -chi.outer_radius, chi.outer_radius)
    weyl = weyl_quantize_chi(grid, hbar, chi)
    checks = [motivation_identity_check(state, x, chi, uq, weyl) for x in config.x_samples]
    inner = grid.nodes[np.abs(grid.nodes) <= 1.0]
    sup = float(np.max(averaged_intensity_flat(state, inner, chi, uq)))
    return checks, sup, weyl.operator_norm()


def run_flat_average(config, serial=True, scale=1.0):
    _need_hbar(config)
    tol = (config.tolerance or 1e-6) * scale
    rows, sups, norms = [], [], []
    for hbar, out in zip(config.hbar_list, _map(_flat_task, [(config, h) for h in config.hbar_list], serial)):
        checks, sup, norm = out
        sups.append(sup)
        norms.append(norm)
        for x, (lhs, rhs, gap) in zip(config.x_samples, checks):
            rel = gap / max(abs(rhs), 1e-300)
            rows.append(ReportRow("flat-identity", hbar, x, lhs, rhs, rel, _status(rel <= tol)))
        if not config.x_samples:
            worst = max((c[2] / max(abs(c[1]), 1e-300) for c in checks), default=None)
            rows.append(ReportRow("flat-identity", hbar, None, sup, None, worst, "ok"))
        rows.append(ReportRow("flat-sup-average", hbar, None, sup, None, None, "ok"))
    ratio = max(sups) / min(sups)
    gaps = [r.rel_gap for r in rows if r.experiment == "flat-identity" and r.rel_gap is not None]
    summary = {
        "hbar": list(config.hbar_list),
        "max_identity_gap": max(gaps) if gaps else None,
        "identity_tolerance": tol,
        "sup_average": sups,
        "band_ratio": ratio,
        "band_bounded": ratio <= config.band_bound,
        "weyl_operator_norm": norms,
        "pass": bool((not gaps or max(gaps) <= tol) and ratio <= config.band_bound),
    }
    return ExperimentResult("flat-average", rows, summary)


# ---------------------------------------------------------- oscillator model


def _ho_average_task(args):
    config, hbar = args
    cfg = _ho_config(config, hbar)
    try:
        deformed = ho_rows(cfg, config.u_nodes)
    except _RESOLUTION_ERRORS as exc:
        return None, str(exc)
    quad = gauss_legendre(config.u_nodes, -cfg.epsilon, cfg.epsilon)
    xs = config.x_samples
    if not xs:
        # aggregate over the validity band
        inside = np.abs(cfg.grid.nodes) <= cfg.band_edge
        xs = cfg.grid.nodes[inside]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfBandWarning)
        prof = averaged_intensity_ho(cfg, xs, quad, deformed=deformed)
    return prof, None


def run_ho_average(config, serial=True, scale=1.0):
    _need_hbar(config)
    handler = {"average": _ho_average, "triangle": _ho_triangle, "invariants": _ho_invariants}
    return handler[config.mode](config, serial, scale)


def _ho_average(config, serial, scale):
    oracle = limit_intensity(config.t0)
    sin_t0 = math.sin(config.t0)
    rows, profiles, worst = [], [], []
    for hbar, (prof, err) in zip(
        config.hbar_list, _map(_ho_average_task, [(config, h) for h in config.hbar_list], serial)
    ):
        if prof is None:
            rows.append(ReportRow("ho-average", hbar, None, None, oracle, None, "error:resolution"))
            log.error("hbar=%g: %s", hbar, err)
            continue
        if config.x_samples:
            for x, v, inb in zip(prof.x_samples, prof.values, prof.in_band):
                rows.append(ReportRow("ho-average", hbar, float(x), float(v), oracle, _rel(v, oracle),
                                      "ok" if inb else "warning:out-of-band"))
        else:
            j = int(np.argmax(np.abs(prof.values * sin_t0 - 1)))
            rows.append(ReportRow("ho-average", hbar, None, float(prof.values[j]), oracle,
                                  _rel(prof.values[j], oracle), "ok"))
        band = AverageProfile(hbar, prof.x_samples[prof.in_band], prof.values[prof.in_band])
        profiles.append(band)
        worst.append(float(np.max(np.abs(band.values * sin_t0 - 1))) if band.values.size else math.nan)
    summary = {"hbar": list(config.hbar_list), "oracle": oracle, "max_abs_deviation": worst}
    if len(profiles) == len(config.hbar_list) and profiles:
        finest = profiles[-1].values * sin_t0
        lo, hi = 0.85 / scale, 1.15 * scale
        monotone = all(b < a for a, b in zip(worst, worst[1:]))
        summary.update(
            finest_scaled_min=float(finest.min()),
            finest_scaled_max=float(finest.max()),
            finest_within=[lo, hi],
            finest_in_window=bool(finest.min() >= lo and finest.max() <= hi),
            deviation_decreasing=monotone,
        )
        if len(profiles) >= 3:
            band = two_sided_band(profiles, config.band_bound)
            summary.update(band_lower=band.lower, band_upper=band.upper, band_ratio=band.ratio,
                           band_bounded=band.bounded)
        summary["pass"] = bool(summary["finest_in_window"] and monotone)
    return ExperimentResult("ho-average", rows, summary)


def _triangle_task(args):
    config, hbar = args
    cfg = _ho_config(config, hbar)
    phi = ho_ground_state(cfg)
    nodes = cfg.grid.nodes
    window = np.abs(nodes) <= 2.0
    out = []
    for u in config.u_values:
        try:
            op = build_ho_operator(cfg, float(u), basis="momentum")
            spec = propagate_spectral(op, phi, cfg.t0, cfg.hbar, n_states="auto").values[window]
            meh = mehler_propagate(cfg, float(u), nodes[window])
        except _RESOLUTION_ERRORS as exc:
            out.append((u, None, str(exc)))
            continue
        coh = coherent_oracle(cfg.hbar, cfg.t0, float(u), nodes[window])
        ref = float(np.max(coh))
        gaps = {
            "spectral-mehler": float(np.max(np.abs(np.abs(spec) - np.abs(meh)))) / ref,
            "spectral-coherent": float(np.max(np.abs(np.abs(spec) - coh))) / ref,
            "mehler-coherent": float(np.max(np.abs(np.abs(meh) - coh))) / ref,
        }
        out.append((u, (gaps, float(np.max(np.abs(spec))), float(np.max(np.abs(meh))), ref), None))
    return out


def _ho_triangle(config, serial, scale):
    tol = (config.tolerance or 1e-6) * scale
    rows, worst = [], 0.0
    results = _map(_triangle_task, [(config, h) for h in config.hbar_list], serial)
    for hbar, per_u in zip(config.hbar_list, results):
        for u, data, err in per_u:
            tag = f"ho-triangle[u={u:+g}]"
            if data is None:
                rows.append(ReportRow(tag, hbar, None, None, None, None, "error:resolution"))
                log.error("hbar=%g u=%g: %s", hbar, u, err)
                worst = math.inf
                continue
            gaps, spec_sup, meh_sup, ref = data
            values = {"spectral-mehler": (spec_sup, meh_sup), "spectral-coherent": (spec_sup, ref),
                      "mehler-coherent": (meh_sup, ref)}
            for pair, gap in gaps.items():
                worst = max(worst, gap)
                v, o = values[pair]
                rows.append(ReportRow(f"{tag}:{pair}", hbar, None, v, o, gap, _status(gap <= tol)))
    summary = {"hbar": list(config.hbar_list), "u_values": list(config.u_values),
               "max_pairwise_gap": worst, "tolerance": tol, "pass": bool(worst <= tol)}
    return ExperimentResult("ho-average", rows, summary)


def _invariants_task(args):
    config, hbar = args
    cfg = _ho_config(config, hbar)
    n = cfg.count
    out = {}
    # unitarity of the spectral propagator at every requested u
    unit, gauge = 0.0, 0.0
    vals0, _ = build_ho_operator(cfg, 0.0, basis="momentum").eigh()
    kinetic_cap = 0.5 * cfg.grid.max_momentum(hbar) ** 2
    resolved = vals0 < 0.25 * min(kinetic_cap, 0.5 * cfg.half_width**2)
    for u in config.u_values:
        vals, vecs = build_ho_operator(cfg, float(u), basis="momentum").eigh()
        prop = (vecs * np.exp(-1j * cfg.t0 * vals / hbar)) @ vecs.conj().T
        unit = max(unit, float(np.max(np.abs(prop.conj().T @ prop - np.eye(n)))))
        gauge = max(gauge, float(np.max(np.abs(vals[resolved] - vals0[resolved]) / np.abs(vals0[resolved]))))
    out["unitarity"] = unit
    out["gauge-spectrum"] = gauge
    out["resolved-levels"] = int(np.count_nonzero(resolved))
    resid = 0.0
    for u in config.u_values:
        r, _ = conjugated_operator_check(cfg, float(u))
        resid = max(resid, r / cfg.energy)
    out["qu-residual"] = resid
    return out


def _parseval_defect(sizes=(64, 256, 1024), hbar=0.1, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in sizes:
        grid = UniformGrid(-5.0, 5.0, n)
        f = WaveField(grid, rng.standard_normal(n) + 1j * rng.standard_normal(n), hbar)
        coeffs = dft_forward(f)
        d_eta = hbar * 2 * np.pi / grid.length
        lhs = float(np.sum(np.abs(coeffs) ** 2) * d_eta)
        rhs = f.l2_norm() ** 2
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def _ho_invariants(config, serial, scale):
    tols = {"unitarity": 1e-10, "gauge-spectrum": 1e-8, "qu-residual": 1e-6, "parseval": 1e-12}
    tols = {k: v * scale for k, v in tols.items()}
    rows, worst = [], {k: 0.0 for k in tols}
    results = _map(_invariants_task, [(config, h) for h in config.hbar_list], serial)
    for hbar, res in zip(config.hbar_list, results):
        for key in ("unitarity", "gauge-spectrum", "qu-residual"):
            worst[key] = max(worst[key], res[key])
            rows.append(ReportRow(f"invariant:{key}", hbar, None, res[key], 0.0, res[key],
                                  _status(res[key] <= tols[key])))
    worst["parseval"] = _parseval_defect()
    rows.append(ReportRow("invariant:parseval", None, None, worst["parseval"], 0.0, worst["parseval"],
                          _status(worst["parseval"] <= tols["parseval"])))
    summary = {
        "hbar": list(config.hbar_list),
        "worst": worst,
        "tolerance": tols,
        "resolved_levels": [r["resolved-levels"] for r in results],
        "pass": all(worst[k] <= tols[k] for k in tols),
    }
    return ExperimentResult("ho-average", rows, summary)


# -------------------------------------------------------------- sup scaling


def run_sup_scaling(config, serial=True, scale=1.0):
    if config.mode == "zonal":
        return _zonal_sup_scaling(config, scale)
    _need_hbar(config)
    cfgs = [_ho_config(config, h) for h in config.hbar_list]
    try:
        deformed = dict(zip(cfgs, _map(_sup_rows_task, [(config, c) for c in cfgs], serial)))
    except _RESOLUTION_ERRORS as exc:
        log.error("%s", exc)
        return ExperimentResult("sup-scaling", [ReportRow("sup-scaling", None, None, None, None, None,
                                                          "error:resolution")], {"error": str(exc)})
    stats = sup_statistics(cfgs, config.u_nodes, deformed=deformed)
    rows = []
    lim = limit_intensity(config.t0)
    for cfg, sup, avg, where in zip(cfgs, stats.sup_of_average, stats.average_of_sup, stats.x_at_sup):
        exact = 2 * cfg.epsilon * (math.pi * cfg.hbar) ** -0.5
        rows.append(ReportRow("sup-scaling:int-sup", cfg.hbar, None, float(avg), exact, _rel(avg, exact), "ok"))
        rows.append(ReportRow("sup-scaling:sup-int", cfg.hbar, float(where), float(sup), lim, _rel(sup, lim), "ok"))
    slope, ratio = stats.slope, stats.sup_ratio
    tol = 0.05 * scale
    summary = {
        "hbar": list(config.hbar_list),
        "slope": slope,
        "slope_target": -0.5,
        "slope_tolerance": tol,
        "sup_of_average": stats.sup_of_average,
        "average_of_sup": stats.average_of_sup,
        "band_ratio": ratio,
        "pass": bool(abs(slope + 0.5) <= tol and ratio <= config.band_bound),
    }
    return ExperimentResult("sup-scaling", rows, summary)


def _sup_rows_task(args):
    config, cfg = args
    return ho_rows(cfg, config.u_nodes)


def _zonal_sup_scaling(config, scale):
    if not config.degrees:
        raise ConfigError("zonal sup-scaling needs degrees")
    vals = zonal_pole_values(config.degrees)
    rows = [
        ReportRow("sup-scaling:zonal-pole", float(1 / math.sqrt(n * (n + 1))), 0.0, float(v),
                  float(zonal_normalization(n)), _rel(v, zonal_normalization(n)), "ok")
        for n, v in zip(config.degrees, vals)
    ]
    try:
        slope = zonal_sup_scaling(config.degrees)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    tol = 0.01 * scale
    summary = {"degrees": config.degrees, "slope": slope, "slope_target": -0.5, "slope_tolerance": tol,
               "pass": bool(abs(slope + 0.5) <= tol)}
    return ExperimentResult("sup-scaling", rows, summary)


# -------------------------------------------------------------- zonal model


def _zonal_config(config, n):
    try:
        return ZonalConfig(n, config.t0, config.epsilon)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc


def run_zonal_average(config, serial=True, scale=1.0):
    if not config.degrees:
        raise ConfigError("zonal-average needs degrees")
    if config.mode == "consistency":
        return _zonal_consistency(config, scale)
    items = [(config, n) for n in config.degrees]
    results = _map(_zonal_average_task, items, serial)
    rows, ratios, sups = [], [], []
    for n, (avg, lim, rep, err) in zip(config.degrees, results):
        zc = _zonal_config(config, n)
        if avg is None:
            rows.append(ReportRow("zonal-average", zc.hbar, 0.0, None, lim, None, "error:resolution"))
            log.error("n=%d: %s", n, err)
            continue
        ratios.append(avg / lim)
        sups.append(rep.sup)
        rows.append(ReportRow("zonal-average", zc.hbar, 0.0, avg, lim, _rel(avg, lim), "ok"))
        rows.append(ReportRow("zonal-local-sup", zc.hbar, None, rep.sup, rep.envelope,
                              (rep.sup - rep.envelope) / rep.envelope if math.isfinite(rep.envelope) else None,
                              "ok"))
    lo, hi = 0.7 / scale, 1.3 * scale
    thresholds = [2 * config.t0 * config.epsilon * math.sqrt(n * (n + 1)) for n in config.degrees]
    summary = {"degrees": config.degrees, "hbar": list(config.hbar_list), "c0": config.c0,
               "ratio_to_limit": ratios, "scale_parameter": thresholds}
    if ratios:
        band_ratio = max(ratios) / min(ratios)
        sup_ratio = max(sups) / min(sups)
        summary.update(
            ratio_window=[lo, hi],
            band_ratio=band_ratio,
            local_sup=sups,
            local_sup_ratio=sup_ratio,
            small_enough=all(t >= 15 for t in thresholds),
        )
        summary["pass"] = bool(
            len(ratios) == len(config.degrees)
            and all(lo <= r <= hi for r in ratios)
            and band_ratio <= 2
            and sup_ratio <= 3
        )
    return ExperimentResult("zonal-average", rows, summary)


def _zonal_average_task(args):
    config, n = args
    zc = _zonal_config(config, n)
    lim = zonal_average_limit(zc)
    try:
        disk = disk_quadrature(zc.epsilon, config.disk_radial, config.disk_angular)
        avg = averaged_intensity_zonal(zc, np.zeros(2), disk)
        rep = local_sup_bound_check(zc, config.c0)
    except _RESOLUTION_ERRORS as exc:
        return None, lim, None, str(exc)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    return avg, lim, rep, None


def _zonal_consistency(config, scale):
    tol_lap, tol_sur, tol_slope = 1e-10 * scale, 1e-8 * scale, 0.01 * scale
    radii = np.linspace(0.0, math.pi, 9)
    lap_gap = 0.0
    for n in range(1, config.max_degree + 1):
        lap = zonal_laplace_integral(n, radii)
        rec = legendre_pn(n, np.cos(radii))
        lap_gap = max(lap_gap, float(np.max(np.abs(lap - rec))))
    rows = [ReportRow(f"zonal-laplace[n<={config.max_degree}]", None, None, lap_gap, 0.0, lap_gap,
                      _status(lap_gap <= tol_lap))]
    rng = np.random.default_rng(0)
    sur_gap = 0.0
    for n in config.degrees:
        zc = _zonal_config(config, n)
        r = zc.epsilon * np.sqrt(rng.random(32))
        a = 2 * np.pi * rng.random(32)
        u = np.column_stack([r * np.cos(a), r * np.sin(a)])
        x = 0.1 * (rng.random((32, 2)) - 0.5)
        vals = np.abs(surrogate_values(zc, u, x))
        oracle = bessel_oracle(zc.hbar, zc.t0, u, x)
        gap = float(np.max(np.abs(vals - oracle)) / np.max(oracle))
        sur_gap = max(sur_gap, gap)
        rows.append(ReportRow("zonal-surrogate", zc.hbar, None, float(vals.max()), float(oracle.max()), gap,
                              _status(gap <= tol_sur)))
    try:
        slope = zonal_sup_scaling(config.degrees)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    for n, v in zip(config.degrees, zonal_pole_values(config.degrees)):
        lap0 = zonal_normalization(n) * zonal_laplace_integral(n, 0.0)
        rows.append(ReportRow("zonal-pole", float(1 / math.sqrt(n * (n + 1))), 0.0, float(v), float(lap0),
                              _rel(v, lap0), "ok"))
    summary = {
        "max_degree": config.max_degree,
        "laplace_gap": lap_gap,
        "surrogate_gap": sur_gap,
        "slope": slope,
        "tolerance": {"laplace": tol_lap, "surrogate": tol_sur, "slope": tol_slope},
        "pass": bool(lap_gap <= tol_lap and sur_gap <= tol_sur and abs(slope + 0.5) <= tol_slope),
    }
    return ExperimentResult("zonal-average", rows, summary)


# -------------------------------------------------------------- restriction


def gaussian_line_integral(hbar, start, end, u):
    """``int_segment (2 pi hbar)^{-1} exp(-|p + u|^2 / 2 hbar) d sigma`` in closed form."""
    from scipy.special import erf

    start, end, u = (np.asarray(v, float) for v in (start, end, u))
    d = end - start
    length = float(np.linalg.norm(d))
    e = d / length
    q = start + u
    s0 = -float(q @ e)
    perp2 = float(q @ q) - s0 * s0
    s = math.sqrt(2 * hbar)
    along = 0.5 * math.sqrt(math.pi) * s * (erf((length - s0) / s) + erf(s0 / s))
    return math.exp(-perp2 / (2 * hbar)) * along / (2 * math.pi * hbar)


def _restriction_ho_task(args):
    config, hbar = args
    cfg = _ho_config(config, hbar)
    try:
        rows = ho_rows(cfg, config.u_nodes)
    except _RESOLUTION_ERRORS as exc:
        return None, str(exc)
    quad = gauss_legendre(config.u_nodes, -cfg.epsilon, cfg.epsilon)
    grid = cfg.grid
    curve = Curve.point(0.0)
    # H first at each u (spectral interpolation of the row at 0) ...
    per_u = np.array([restriction_integral(lambda p, r=r: WaveField(grid, r, hbar).evaluate(p), curve)
                      for r in rows])
    # ... against u first at each point of H (averaged intensity, then the point mass)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfBandWarning)
        swapped = float(averaged_intensity_ho(cfg, np.array([0.0]), quad, deformed=rows).values[0])
    return (per_u, quad, swapped), None


def _flat2d_task(args):
    try:
        return _flat2d(*args)
    except _RESOLUTION_ERRORS as exc:
        return None, str(exc)


def _flat2d(config, hbar):
    half = 4.0
    need = 16 * half / (math.pi * math.sqrt(hbar))
    count = int(2 ** math.ceil(math.log2(max(need, 64))))
    grid = UniformGrid(-half, half, count)
    state = gaussian_state((grid, grid), hbar)
    disk = disk_quadrature(config.epsilon, 12, 24)
    start, end = np.array([-1.0, -0.3]), np.array([1.0, 0.4])
    curve = Curve.segment(start, end, 128)
    pts, wts = curve.nodes()
    vals = np.abs(deformed_values_at(state, disk.nodes, pts)) ** 2
    per_u = vals @ wts
    swapped = float(wts @ (disk.weights @ vals))
    oracle = np.array([gaussian_line_integral(hbar, start, end, u) for u in disk.nodes])
    # unpropagated state as a direct restriction_integral call
    direct = restriction_integral(lambda p: state.evaluate(p), curve)
    # |f|^2 = (pi hbar)^{-1} exp(-|p|^2 / hbar) is the same Gaussian at hbar / 2
    oracle0 = gaussian_line_integral(hbar / 2, start, end, np.zeros(2))
    return (per_u, disk, swapped, oracle, direct, oracle0), None


def run_restriction(config, serial=True, scale=1.0):
    _need_hbar(config)
    fub_tol = 1e-8 * scale
    rows, summary = [], {"hbar": list(config.hbar_list), "omega_exponent": config.omega_exponent}
    ok = True
    for model in config.models:
        if model == "oscillator":
            results = _map(_restriction_ho_task, [(config, h) for h in config.hbar_list], serial)
        elif model == "flat2d":
            results = _map(_flat2d_task, [(config, h) for h in config.hbar_list], serial)
        else:
            raise ConfigError(f"unknown restriction model {model!r}")
        info = {"fubini_gap": [], "good_fraction": [], "omega": []}
        for hbar, (res, err) in zip(config.hbar_list, results):
            tag = f"restriction-{model}"
            if res is None:
                rows.append(ReportRow(tag, hbar, None, None, None, None, "error:resolution"))
                log.error("hbar=%g: %s", hbar, err)
                ok = False
                continue
            per_u, quad, swapped = res[:3]
            iterated = float(np.dot(quad.weights, per_u))
            gap = fubini_check(per_u, quad, swapped, tol=math.inf)
            rel = gap / max(1.0, abs(swapped))
            rows.append(ReportRow(f"{tag}:fubini", hbar, None, iterated, swapped, rel, _status(rel <= fub_tol)))
            omega = hbar**config.omega_exponent
            rep = good_set_fraction(per_u, quad.weights, omega)
            good = rep.good_fraction >= 1 - omega
            rows.append(ReportRow(f"{tag}:good-fraction", hbar, None, rep.good_fraction, 1 - omega, None,
                                  _status(good)))
            ok &= rel <= fub_tol and good
            info["fubini_gap"].append(rel)
            info["good_fraction"].append(rep.good_fraction)
            info["omega"].append(omega)
            if model == "flat2d":
                oracle, direct, oracle0 = res[3], res[4], res[5]
                line_gap = float(np.max(np.abs(per_u - oracle)) / np.max(oracle))
                gap0 = _rel(direct, oracle0)
                rows.append(ReportRow(f"{tag}:line-oracle", hbar, None, float(per_u.max()), float(oracle.max()),
                                      line_gap, _status(line_gap <= 1e-6 * scale)))
                rows.append(ReportRow(f"{tag}:line-oracle-u0", hbar, None, direct, oracle0, gap0,
                                      _status(gap0 <= 1e-6 * scale)))
                ok &= line_gap <= 1e-6 * scale and gap0 <= 1e-6 * scale
                info.setdefault("line_oracle_gap", []).append(max(line_gap, gap0))
        summary[model] = info
    summary["pass"] = bool(ok)
    return ExperimentResult("restriction", rows, summary)


# ------------------------------------------------------------- admissibility


def _constant(x, u):
    return u[:2]


def _degenerate(x, u):
    return np.array([u[0], u[0]])


def _overcomplete(x, u):
    return np.array([u[0] + u[2], u[1]])


def _nonlinear(x, u):
    return np.array([u[0] * (1 + x[0] ** 2), u[1] * np.exp(x[0])])


def _nonlinear_jac(x, u):
    return np.diag([1 + x[0] ** 2, np.exp(x[0])])


FAMILIES = {
    "constant": (MagneticFamily(2, 2, _constant, lambda x, u: np.eye(2), "constant"), 1.0),
    "degenerate": (MagneticFamily(2, 2, _degenerate, lambda x, u: np.array([[1.0, 0], [1, 0]]), "degenerate"), 0.0),
    "overcomplete": (MagneticFamily(2, 3, _overcomplete, lambda x, u: np.array([[1.0, 0, 1], [0, 1, 0]]),
                                    "overcomplete"), 1.0),
    "nonlinear": (MagneticFamily(2, 2, _nonlinear, _nonlinear_jac, "nonlinear"), None),
}


def _rotated(family, q):
    return MagneticFamily(family.space_dim, family.param_dim, lambda x, u: family(x, q @ u), None, family.name)


def run_admissibility(config, serial=True, scale=1.0):
    threshold = config.tolerance or 1e-3
    g = np.linspace(-1.0, 1.0, 5)
    xs = np.array([[a, b] for a in g for b in g])
    rng = np.random.default_rng(0)
    rows, summary = [], {"threshold": threshold, "families": {}}
    inv_tol = 1e-10 * scale
    ok = True
    for name in config.families:
        if name not in FAMILIES:
            raise ConfigError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
        family, expected = FAMILIES[name]
        k = family.param_dim
        us = rng.standard_normal((8, k))
        us *= config.epsilon * rng.random((8, 1)) / np.linalg.norm(us, axis=1, keepdims=True)
        rep = admissibility_check(family, xs, us, threshold)
        q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        # same physical samples in rotated coordinates u' = Q^T u
        rot = admissibility_check(_rotated(family, q), xs, us @ q, threshold)
        defect = abs(rot.min_singular_value - rep.min_singular_value)
        verdict = "admissible" if rep.admissible else "not-admissible"
        gap = None if expected is None else abs(rep.min_singular_value - expected)
        good = defect <= inv_tol and (gap is None or gap <= 1e-8)
        rows.append(ReportRow(f"admissibility:{name}:{verdict}", None, None, rep.min_singular_value, expected,
                              gap, _status(good)))
        ok &= good
        summary["families"][name] = {
            "admissible": rep.admissible,
            "min_singular_value": rep.min_singular_value,
            "chosen_subset": [i + 1 for i in rep.chosen_subset],
            "orthogonal_defect": defect,
        }
    summary["pass"] = bool(ok)
    return ExperimentResult("admissibility", rows, summary)


RUNNERS = {
    "flat-average": run_flat_average,
    "ho-average": run_ho_average,
    "zonal-average": run_zonal_average,
    "restriction": run_restriction,
    "admissibility": run_admissibility,
    "sup-scaling": run_sup_scaling,
}


def run_experiment(config, serial=True, tolerance_scale=1.0):
    """Dispatch ``config`` to its runner.

    Raises
    ------
    ConfigError
        If the configuration violates a module precondition.
    """
    if not tolerance_scale > 0:
        raise ConfigError("tolerance scale must be positive")
    try:
        return RUNNERS[config.experiment](config, serial, tolerance_scale)
    except _RESOLUTION_ERRORS as exc:
        log.error("%s: %s", config.experiment, exc)
        row = ReportRow(config.experiment, None, None, None, None, None, "error:resolution")
        return ExperimentResult(config.experiment, [row], {"error": str(exc), "pass": False})
    except MagDeformError as exc:
        raise ConfigError(str(exc)) from exc
