"""Zonal harmonics on S^2 and their magnetic deformation near the north pole.

The deformed harmonic is modelled by the circle integral

    Z^(u)(x) ~ (2 pi hbar)^{-1/2} int_{S^1} exp(i [<x, w> - t0 |w + u|^2] / hbar) dw,

with unit amplitude.  Expanding ``|w + u|^2 = 1 + 2<w, u> + |u|^2`` reduces
it to ``sqrt(2 pi / hbar) |J0(|x - 2 t0 u| / hbar)|`` in modulus, which is
what :func:`bessel_oracle` evaluates.  ``J0`` itself comes from its integral
representation, not from a special-function library.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ResolutionError
from .numerics import CircleQuadrature, disk_quadrature

__all__ = [
    "ZonalConfig",
    "LocalSupReport",
    "legendre_pn",
    "zonal_laplace_integral",
    "zonal_normalization",
    "zonal_pole_values",
    "zonal_sup_scaling",
    "required_circle_nodes",
    "deformed_zonal_surrogate",
    "surrogate_values",
    "bessel_j0",
    "bessel_oracle",
    "averaged_intensity_zonal",
    "zonal_average_limit",
    "local_sup_bound_check",
]

_CHUNK = 256


@dataclass(frozen=True)
class ZonalConfig:
    """Degree ``n`` fixes ``hbar = (n (n + 1))^{-1/2}``."""

    degree: int
    t0: float = 0.1
    epsilon: float = 0.4

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidArgumentError("degree must be a positive integer")
        if not 0 < self.t0 <= 0.5:
            raise InvalidArgumentError("need 0 < t0 <= 0.5")
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive")
        if self.t0 * self.epsilon > 0.2 + 1e-15:
            raise InvalidArgumentError("surrogate needs t0 * epsilon <= 0.2")

    @property
    def hbar(self):
        n = self.degree
        return 1.0 / np.sqrt(n * (n + 1.0))

    @property
    def normalization(self):
        return zonal_normalization(self.degree)


def legendre_pn(n, t):
    """``P_n(t)`` from ``(k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1):
        raise InvalidArgumentError("Legendre argument must lie in [-1, 1]")
    if n < 0:
        raise InvalidArgumentError("degree must be nonnegative")
    prev, cur = np.ones_like(t), t.copy()
    if n == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1) * t * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def zonal_laplace_integral(n, r, quad=None):
    """``(1/2pi) int (cos r + i sin r cos tau)^n d tau`` on the circle rule.

    The integrand is a trigonometric polynomial of degree ``n``; at least
    ``4n`` nodes are demanded.
    """
    quad = CircleQuadrature(max(4 * n, 4)) if quad is None else quad
    if quad.node_count < max(4 * n, 4):
        raise ResolutionError(f"need >= {4 * n} circle nodes for degree {n}", estimate=quad.node_count)
    r = np.asarray(r, dtype=float)
    tau = quad.angles
    base = np.cos(r)[..., None] + 1j * np.sin(r)[..., None] * np.cos(tau)
    val = np.sum(base**n, axis=-1) * quad.weight / (2 * np.pi)
    out = val.real
    return float(out) if out.ndim == 0 else out


def zonal_normalization(n):
    """L^2(S^2) normalization ``sqrt((2n+1)/4pi)`` of ``P_n(cos r)``."""
    return np.sqrt((2 * np.asarray(n, dtype=float) + 1) / (4 * np.pi))


def zonal_pole_values(n_list, r=0.0):
    """Normalized ``|Z_n(r)|`` for each degree."""
    return np.array([zonal_normalization(n) * abs(legendre_pn(n, np.cos(r))) for n in n_list])


def zonal_sup_scaling(n_list):
    """Log-log slope of the normalized pole value against ``hbar``."""
    n = np.asarray(n_list, dtype=float)
    if n.max() < 10 * n.min():
        raise InvalidArgumentError("degrees must span at least one decade")
    hbar = 1.0 / np.sqrt(n * (n + 1))
    return float(np.polyfit(np.log(hbar), np.log(zonal_pole_values(n_list)), 1)[0])


def required_circle_nodes(hbar, t0, epsilon, x_norm=0.0):
    return int(np.ceil(20 * (x_norm + 2 * t0 * (1 + epsilon)) / hbar))


def _check_phase_domain(config, u, x):
    if np.any(np.linalg.norm(np.atleast_2d(x), axis=-1) > 0.3 + 1e-12):
        raise InvalidArgumentError("surrogate needs |x| <= 0.3")
    if np.any(np.linalg.norm(np.atleast_2d(u), axis=-1) > config.epsilon * (1 + 1e-12)):
        raise InvalidArgumentError("surrogate needs |u| <= epsilon")


def surrogate_values(config, u_nodes, x, quad=None):
    """Surrogate ``Z^(u)(x)`` for every row of ``u_nodes`` (and optionally of ``x``).

    ``x`` is a single 2-vector or an array with one row per parameter.
    """
    u = np.atleast_2d(np.asarray(u_nodes, dtype=float))
    x = np.asarray(x, dtype=float)
    xs = np.broadcast_to(x, u.shape) if x.ndim == 1 else x
    _check_phase_domain(config, u, xs)
    h, t0 = config.hbar, config.t0
    need = required_circle_nodes(h, t0, config.epsilon, float(np.max(np.linalg.norm(xs, axis=1))))
    quad = CircleQuadrature(need) if quad is None else quad
    if quad.node_count < need:
        raise ResolutionError(f"oscillation needs >= {need} circle nodes", estimate=quad.node_count)
    w = quad.points()
    out = np.empty(len(u), dtype=complex)
    for s in range(0, len(u), _CHUNK):
        uu, xx = u[s : s + _CHUNK], xs[s : s + _CHUNK]
        shifted = (uu[:, None, :] + w[None, :, :]) ** 2
        phase = xx @ w.T - t0 * shifted.sum(axis=-1)
        out[s : s + _CHUNK] = np.exp(1j * phase / h).sum(axis=1)
    return out * quad.weight / np.sqrt(2 * np.pi * h)


def deformed_zonal_surrogate(config, u, x, quad=None, check=False):
    """Surrogate deformed zonal harmonic at one ``(u, x)``.

    With ``check=True`` the node count is doubled and the result must move
    by less than ``1e-8`` relative to the pole scale ``sqrt(2 pi / hbar)``.
    """
    val = surrogate_values(config, np.atleast_2d(u), np.asarray(x, float), quad)[0]
    if check:
        n = (quad.node_count if quad is not None else
             required_circle_nodes(config.hbar, config.t0, config.epsilon, float(np.linalg.norm(x))))
        fine = surrogate_values(config, np.atleast_2d(u), np.asarray(x, float), CircleQuadrature(2 * n))[0]
        change = abs(fine - val) / np.sqrt(2 * np.pi / config.hbar)
        if change >= 1e-8:
            raise ResolutionError("circle quadrature not converged", estimate=change)
    return complex(val)


def bessel_j0(z, node_count=None):
    """``J0(z) = (1/2pi) int_0^{2pi} cos(z sin theta) d theta`` by the periodic trapezoid rule."""
    z = np.asarray(z, dtype=float)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    m = int(2 * zmax + 64) if node_count is None else int(node_count)
    theta = 2 * np.pi * np.arange(m) / m
    out = np.cos(np.multiply.outer(z, np.sin(theta))).mean(axis=-1)
    return float(out) if out.ndim == 0 else out


def bessel_oracle(hbar, t0, u, x):
    """``sqrt(2 pi / hbar) |J0(|x - 2 t0 u| / hbar)|``; ``u`` and ``x`` broadcast over rows."""
    arg = np.linalg.norm(np.asarray(x, float) - 2 * t0 * np.asarray(u, float), axis=-1) / hbar
    return np.sqrt(2 * np.pi / hbar) * np.abs(bessel_j0(arg))


def averaged_intensity_zonal(config, x, disk=None, quad=None):
    """``sum_m w_m |Z^(u_m)(x)|^2`` over a disk rule of radius ``epsilon``."""
    disk = disk_quadrature(config.epsilon, 64, 96) if disk is None else disk
    if abs(disk.radius - config.epsilon) > 1e-12:
        raise InvalidArgumentError("disk radius must equal epsilon")
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) > config.epsilon * config.t0 + 1e-12:
        raise InvalidArgumentError("x must lie within epsilon * t0 of the pole")
    vals = surrogate_values(config, disk.nodes, x, quad)
    return float(disk.weights @ np.abs(vals) ** 2)


def zonal_average_limit(config):
    """Small-hbar limit ``2 pi epsilon / t0`` of the pole average."""
    return 2 * np.pi * config.epsilon / config.t0


@dataclass(frozen=True)
class LocalSupReport:
    sup: float
    oracle_sup: float
    envelope: float
    min_argument: float


def local_sup_bound_check(config, c0=4.0, x_radii=4, x_angles=12, u_radii=6, u_angles=24):
    """Sup of the surrogate modulus over ``|x| <= eps/c0``, ``eps/2 <= |u| <= eps``.

    ``envelope`` is ``sqrt(2 pi / hbar) sqrt(2 / (pi z_min))`` with ``z_min``
    the smallest sampled ``|x - 2 t0 u| / hbar``; it is ``inf`` when the
    samples allow ``z_min = 0`` (then no hbar-uniform bound exists).
    """
    if c0 < 4:
        raise InvalidArgumentError("c0 must be at least 4")
    eps, h = config.epsilon, config.hbar
    xr = np.linspace(0, eps / c0, x_radii + 1)
    xa = 2 * np.pi * np.arange(x_angles) / x_angles
    xs = np.vstack([[0.0, 0.0]] + [np.column_stack([r * np.cos(xa), r * np.sin(xa)]) for r in xr[1:]])
    ur = np.linspace(eps / 2, eps, u_radii)
    ua = 2 * np.pi * np.arange(u_angles) / u_angles
    us = np.vstack([np.column_stack([r * np.cos(ua), r * np.sin(ua)]) for r in ur])
    xx = np.repeat(xs, len(us), axis=0)
    uu = np.tile(us, (len(xs), 1))
    vals = np.abs(surrogate_values(config, uu, xx))
    oracle = bessel_oracle(h, config.t0, uu, xx)
    z = np.linalg.norm(xx - 2 * config.t0 * uu, axis=1) / h
    zmin = float(z.min())
    # smallest admissible argument over the continuum of samples
    zmin_cont = max(0.0, config.t0 * eps - eps / c0) / h
    envelope = np.inf if zmin_cont == 0 else float(np.sqrt(2 * np.pi / h) * np.sqrt(2 / (np.pi * zmin_cont)))
    return LocalSupReport(float(vals.max()), float(oracle.max()), envelope, zmin)
