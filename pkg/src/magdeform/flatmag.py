"""Constant magnetic potentials on flat space.

On R^n the deformed state ``f^(u) = exp(i/(2 hbar) <hbar D + u, hbar D + u>) f``
is a Fourier multiplier, so on a periodic box it is computed exactly by one
FFT per parameter value.  The u-averaged intensity at ``x`` then equals the
expectation of the Weyl quantization of ``a(y, xi) = chi(y - xi)`` in the
translated state ``g(y) = f(x + y)``; :func:`motivation_identity_check`
evaluates both sides independently.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainTruncationError, InvalidArgumentError
from .numerics import CutoffProfile, UniformGrid, WaveField, trapezoid_rule

__all__ = [
    "FlatState",
    "WeylMatrix",
    "gaussian_state",
    "boundary_mass",
    "flat_magnetic_propagate",
    "flat_inverse_propagate",
    "deformed_values_at",
    "averaged_intensity_flat",
    "default_u_quadrature",
    "weyl_quantize_chi",
    "motivation_identity_check",
]

LEAKAGE_TOLERANCE = 1e-10

# A normalized family f_hbar is just a WaveField on a periodic grid.
FlatState = WaveField


@dataclass(frozen=True, eq=False)
class WeylMatrix:
    """Dense matrix of ``Op_hbar^w(chi(y - xi))`` acting on grid values."""

    matrix: np.ndarray
    hbar: float
    profile: CutoffProfile
    grid: UniformGrid

    def expectation(self, values):
        """``<A g, g>`` with the grid's quadrature weight."""
        g = np.asarray(values, dtype=complex)
        return float(np.real(self.grid.spacing * np.vdot(g, self.matrix @ g)))

    def operator_norm(self):
        return float(np.linalg.norm(self.matrix, 2))


def gaussian_state(grid, hbar, center=0.0, momentum=0.0):
    """L^2-normalized coherent state ``(pi hbar)^{-n/4} exp(-|y-c|^2/2hbar + i p.y/hbar)``.

    ``grid`` may be a single :class:`UniformGrid` or a pair for the 2-D model.
    """
    grids = tuple(grid) if isinstance(grid, (tuple, list)) else (grid,)
    center = np.broadcast_to(np.asarray(center, dtype=float), (len(grids),))
    momentum = np.broadcast_to(np.asarray(momentum, dtype=float), (len(grids),))
    values = np.ones((), dtype=complex)
    for g, c, p in zip(grids, center, momentum):
        y = g.nodes
        one = (np.pi * hbar) ** -0.25 * np.exp(-((y - c) ** 2) / (2 * hbar) + 1j * p * y / hbar)
        values = np.multiply.outer(values, one)
    return WaveField(grid, values, hbar)


def boundary_mass(field, width=None):
    """Fraction of ``|f|^2`` within ``width`` (default ``4 sqrt(hbar)``) of the box edges."""
    width = 4.0 * np.sqrt(field.hbar) if width is None else width
    mask = np.zeros(field.values.shape, dtype=bool)
    for axis, g in enumerate(field.grids):
        y = g.nodes
        near = (y - g.lower < width) | (g.upper - y < width)
        shape = [1] * field.values.ndim
        shape[axis] = g.count
        mask |= near.reshape(shape)
    dens = np.abs(field.values) ** 2
    total = np.sum(dens)
    return float(np.sum(dens[mask]) / total) if total > 0 else 0.0


def _check_leakage(field, what="state"):
    leak = boundary_mass(field)
    if leak > LEAKAGE_TOLERANCE:
        raise DomainTruncationError(f"{what} has significant mass near the box boundary", leak)


def _as_parameter(u, dim):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (dim,):
        raise InvalidArgumentError(f"parameter u must have {dim} components, got shape {u.shape}")
    return u


def _multiplier(grids, hbar, u, sign=1):
    """exp(sign * i/(2 hbar) |hbar xi + u|^2) on the tensor momentum grid."""
    out = np.ones((), dtype=complex)
    for g, uj in zip(grids, u):
        eta = g.momenta(hbar)
        out = np.multiply.outer(out, np.exp(sign * 0.5j * (eta + uj) ** 2 / hbar))
    return out


def flat_magnetic_propagate(state, u, half_time_sign=1):
    """Apply ``exp(i/(2 hbar) <hbar D + u, hbar D + u>)`` to ``state``.

    Parameters
    ----------
    state : WaveField
        Field on a periodic grid (1-D or a 2-D tensor grid).
    u : float or array_like
        Constant magnetic potential, one component per dimension.
    half_time_sign : {+1, -1}
        ``-1`` applies the inverse multiplier.

    Raises
    ------
    DomainTruncationError
        If more than ``1e-10`` of the input mass lies within ``4 sqrt(hbar)``
        of the box boundary.
    """
    if half_time_sign not in (1, -1):
        raise InvalidArgumentError("half_time_sign must be +1 or -1")
    grids = state.grids
    if not all(g.periodic for g in grids):
        raise InvalidArgumentError("flat propagation needs a periodic grid")
    u = _as_parameter(u, len(grids))
    _check_leakage(state)
    spectrum = np.fft.fftn(state.values)
    out = np.fft.ifftn(spectrum * _multiplier(grids, state.hbar, u, half_time_sign))
    return state.with_values(out)


def flat_inverse_propagate(state, u):
    return flat_magnetic_propagate(state, u, half_time_sign=-1)


def deformed_values_at(state, u_nodes, points):
    """Values ``f^(u_m)(p_j)`` for every parameter node and evaluation point.

    Returns an array of shape ``(len(u_nodes), len(points))``.  The
    evaluation is a trigonometric sum, so points need not lie on the grid.
    """
    grids = state.grids
    dim = len(grids)
    u_nodes = np.asarray(u_nodes, dtype=float).reshape(-1, dim)
    pts = np.asarray(points, dtype=float).reshape(-1, dim)
    _check_leakage(state)
    coeffs = np.fft.fftn(state.values) / state.values.size
    hbar = state.hbar
    phase = [np.exp(1j * np.outer(pts[:, a] - g.lower, g.wavenumbers())) for a, g in enumerate(grids)]
    mult = [
        np.exp(0.5j * (g.momenta(hbar)[None, :] + u_nodes[:, a : a + 1]) ** 2 / hbar)
        for a, g in enumerate(grids)
    ]
    if dim == 1:
        return mult[0] @ (coeffs[:, None] * phase[0].T)
    if dim == 2:
        out = np.empty((len(u_nodes), len(pts)), dtype=complex)
        for m in range(len(u_nodes)):
            left = (phase[0] * mult[0][m]) @ coeffs
            out[m] = np.sum(left * (phase[1] * mult[1][m]), axis=1)
        return out
    raise InvalidArgumentError("flat model supports one or two dimensions")


def default_u_quadrature(chi, count=801):
    """Trapezoid rule over ``[-outer, outer]``; the cutoff kills all endpoint terms."""
    return trapezoid_rule(count, -chi.outer_radius, chi.outer_radius)


def averaged_intensity_flat(state, x, chi, u_quad=None):
    """``sum_m w_m chi(|u_m|) |f^(u_m)(x)|^2`` for a 1-D state.

    ``x`` may be a scalar or an array of points; the return type follows.
    """
    if len(state.grids) != 1:
        raise InvalidArgumentError("averaged_intensity_flat is one-dimensional")
    u_quad = default_u_quadrature(chi) if u_quad is None else u_quad
    if u_quad.nodes.min() > -chi.outer_radius + 1e-12 or u_quad.nodes.max() < chi.outer_radius - 1e-12:
        raise InvalidArgumentError("u quadrature must cover the cutoff support")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = deformed_values_at(state, u_quad.nodes, xs)
    weights = u_quad.weights * chi_weights(chi, u_quad.nodes)
    out = weights @ (np.abs(vals) ** 2)
    return float(out[0]) if scalar else out


def chi_weights(chi, u_nodes):
    return chi(np.abs(np.asarray(u_nodes, dtype=float)))


def weyl_quantize_chi(grid, hbar, chi):
    """Dense Weyl quantization of ``a(y, xi) = chi(|y - xi|)`` on a periodic grid.

    The kernel ``(2 pi hbar)^{-1} int exp(i (y - y') xi / hbar) a((y+y')/2, xi) d xi``
    is summed over the grid's own semiclassical momenta.  Entry ``(j, l)``
    only depends on ``j + l`` (through the midpoint) and ``j - l mod N``
    (through the phase), so each midpoint needs one inverse FFT.
    """
    if not grid.periodic:
        raise InvalidArgumentError("Weyl quantization needs a periodic grid")
    n = grid.count
    eta = grid.momenta(hbar)
    mids = grid.lower + 0.5 * grid.spacing * np.arange(2 * n - 1)
    symbol = chi(np.abs(mids[:, None] - eta[None, :]))
    table = np.fft.ifft(symbol, axis=1)  # = (1/N) sum_k e^{2 pi i d k / N} chi(...)
    j = np.arange(n)
    matrix = table[j[:, None] + j[None, :], (j[:, None] - j[None, :]) % n]
    return WeylMatrix(matrix, float(hbar), chi, grid)


def motivation_identity_check(state, x, chi, u_quad=None, weyl=None):
    """Compare the u-averaged intensity at ``x`` with the Weyl expectation.

    Returns
    -------
    lhs, rhs, gap : float
        ``lhs`` from :func:`averaged_intensity_flat`, ``rhs`` from
        ``<Op^w(chi(y - xi)) g, g>`` with ``g(y) = f(x + y)``, and ``|lhs - rhs|``.
    """
    grid = state.grids[0]
    lhs = averaged_intensity_flat(state, x, chi, u_quad)
    if np.allclose(state.values, 0):
        return 0.0, 0.0, 0.0
    g = state.with_values(state.evaluate(grid.nodes + x))
    _check_leakage(g, "translated state")
    weyl = weyl_quantize_chi(grid, state.hbar, chi) if weyl is None else weyl
    rhs = weyl.expectation(g.values)
    return lhs, rhs, abs(lhs - rhs)
