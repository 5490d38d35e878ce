"""Grids, quadratures, the semiclassical DFT pair, a dense eigensolver and
the smooth cutoff used throughout the package.

Conventions
-----------
Semiclassical momenta are ``eta = hbar * xi`` where ``xi`` runs over the
grid wavenumbers ``2*pi*k/length``.  The forward transform is

    F(eta_k) = (2 pi hbar)^(-1/2) * sum_j h * exp(-i y_j eta_k / hbar) f(y_j)

which is unitary from ``(f, weight h)`` to ``(F, weight 2 pi hbar / length)``.
Arrays are kept in numpy FFT order.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, ResolutionError

__all__ = [
    "UniformGrid",
    "WaveField",
    "IntervalQuadrature",
    "CircleQuadrature",
    "BallQuadrature",
    "CutoffProfile",
    "gauss_legendre",
    "trapezoid_rule",
    "disk_quadrature",
    "interval_ball",
    "dft_forward",
    "dft_inverse",
    "hermitian_eigs",
    "chi_eval",
]

DEFAULT_GAUSS_LEGENDRE = 64
DEFAULT_CIRCLE_NODES = 256
DEFAULT_DISK = (48, 96)


@dataclass(frozen=True)
class UniformGrid:
    """Equispaced nodes on ``[lower, upper)`` (periodic) or ``[lower, upper]``."""

    lower: float
    upper: float
    count: int
    periodic: bool = True

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 8:
            raise InvalidArgumentError(f"grid count must be an integer >= 8, got {self.count}")
        if not self.upper > self.lower:
            raise InvalidArgumentError("grid requires upper > lower")

    @property
    def length(self):
        return self.upper - self.lower

    @property
    def spacing(self):
        if self.periodic:
            return self.length / self.count
        return self.length / (self.count - 1)

    @property
    def nodes(self):
        return self.lower + self.spacing * np.arange(self.count)

    @property
    def weights(self):
        w = np.full(self.count, self.spacing)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.spacing
        return w

    def wavenumbers(self):
        """Angular wavenumbers ``xi_k`` in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.count, d=self.spacing)

    def momenta(self, hbar):
        """Semiclassical momenta ``hbar * xi_k`` in FFT order."""
        return hbar * self.wavenumbers()

    def max_momentum(self, hbar):
        return hbar * np.pi / self.spacing


def _as_grids(grid):
    return tuple(grid) if isinstance(grid, (tuple, list)) else (grid,)


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex samples of a wavefunction on a grid, tagged with ``hbar``.

    ``grid`` is a :class:`UniformGrid` for one-dimensional fields or a tuple
    of them for tensor-product fields; ``values`` has the matching shape.
    """

    grid: object
    values: np.ndarray
    hbar: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        shape = tuple(g.count for g in _as_grids(self.grid))
        if values.shape != shape:
            raise InvalidArgumentError(f"values shape {values.shape} does not match grid {shape}")
        if not self.hbar > 0:
            raise InvalidArgumentError("hbar must be positive")
        object.__setattr__(self, "values", values)

    @property
    def grids(self):
        return _as_grids(self.grid)

    @property
    def cell_volume(self):
        return float(np.prod([g.spacing for g in self.grids]))

    def l2_norm(self):
        w = self.grids[0].weights
        for g in self.grids[1:]:
            w = np.multiply.outer(w, g.weights)
        return float(np.sqrt(np.sum(w * np.abs(self.values) ** 2)))

    def with_values(self, values):
        return WaveField(self.grid, values, self.hbar)

    def evaluate(self, points):
        """Trigonometric interpolation of a periodic field at arbitrary points.

        ``points`` has shape ``(m,)`` for 1-D fields and ``(m, d)`` otherwise.
        """
        grids = self.grids
        if not all(g.periodic for g in grids):
            raise InvalidArgumentError("spectral evaluation requires a periodic grid")
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if len(grids) == 1:
            pts = pts.reshape(-1, 1)
        coeffs = np.fft.fft(self.values) if len(grids) == 1 else np.fft.fftn(self.values)
        coeffs = coeffs / self.values.size
        factors = []
        for axis, g in enumerate(grids):
            xi = g.wavenumbers()
            factors.append(np.exp(1j * np.outer(pts[:, axis] - g.lower, xi)))
        if len(grids) == 1:
            return factors[0] @ coeffs
        if len(grids) == 2:
            return np.einsum("mk,kl,ml->m", factors[0], coeffs, factors[1], optimize=True)
        raise InvalidArgumentError("evaluate supports at most two dimensions")


@dataclass(frozen=True, eq=False)
class IntervalQuadrature:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise InvalidArgumentError("nodes and weights must be 1-D arrays of equal length")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def integrate(self, values):
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre rule with ``n`` nodes on ``[a, b]``.

    Exact for polynomials of degree at most ``2n - 1``.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"need n >= 1 nodes, got {n}")
    if not a < b:
        raise InvalidArgumentError(f"need a < b, got [{a}, {b}]")
    t, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (b - a)
    return IntervalQuadrature(0.5 * (a + b) + half * t, half * w)


def trapezoid_rule(n, a, b):
    """Composite trapezoid rule with ``n`` endpoint-inclusive nodes.

    Spectrally accurate for integrands that vanish to all orders at both
    ends, e.g. anything multiplied by a :class:`CutoffProfile`.
    """
    if int(n) != n or n < 2:
        raise InvalidArgumentError("trapezoid rule needs at least two nodes")
    if not a < b:
        raise InvalidArgumentError(f"need a < b, got [{a}, {b}]")
    nodes = np.linspace(a, b, int(n))
    w = np.full(int(n), (b - a) / (n - 1))
    w[0] = w[-1] = 0.5 * w[1]
    return IntervalQuadrature(nodes, w)


@dataclass(frozen=True, eq=False)
class CircleQuadrature:
    """Equispaced rule on ``[0, 2 pi)``; exact for trigonometric degree < node_count."""

    node_count: int = DEFAULT_CIRCLE_NODES

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 1:
            raise InvalidArgumentError("circle quadrature needs a positive node count")

    @property
    def angles(self):
        return 2.0 * np.pi * np.arange(self.node_count) / self.node_count

    @property
    def weight(self):
        return 2.0 * np.pi / self.node_count

    def points(self):
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a)])


@dataclass(frozen=True, eq=False)
class BallQuadrature:
    """Nodes and weights for integrating over the ball of radius ``radius`` in R^k."""

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    radius: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, self.dimension)
        weights = np.asarray(self.weights, dtype=float)
        if len(nodes) != len(weights):
            raise InvalidArgumentError("one weight per node required")
        if np.any(weights <= 0):
            raise InvalidArgumentError("ball quadrature weights must be positive")
        if np.any(np.linalg.norm(nodes, axis=1) > self.radius * (1 + 1e-12)):
            raise InvalidArgumentError("quadrature node outside the ball")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def total_weight(self):
        return float(np.sum(self.weights))


def disk_quadrature(epsilon, radial_count=DEFAULT_DISK[0], angular_count=DEFAULT_DISK[1]):
    """Polar product rule on the disk of radius ``epsilon``.

    Gauss-Legendre in the radius (with the Jacobian ``r`` folded into the
    weights) times the trapezoid rule in the angle.
    """
    if radial_count < 4 or angular_count < 4:
        raise InvalidArgumentError("disk quadrature needs at least 4 radial and 4 angular nodes")
    if not epsilon > 0:
        raise InvalidArgumentError("disk radius must be positive")
    radial = gauss_legendre(radial_count, 0.0, epsilon)
    theta = 2.0 * np.pi * np.arange(angular_count) / angular_count
    r, th = np.meshgrid(radial.nodes, theta, indexing="ij")
    w = np.outer(radial.weights * radial.nodes, np.full(angular_count, 2.0 * np.pi / angular_count))
    nodes = np.column_stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()])
    return BallQuadrature(2, nodes, w.ravel(), float(epsilon))


def interval_ball(epsilon, n=DEFAULT_GAUSS_LEGENDRE):
    """The one-dimensional ball ``[-epsilon, epsilon]`` with Gauss-Legendre nodes."""
    q = gauss_legendre(n, -epsilon, epsilon)
    return BallQuadrature(1, q.nodes[:, None], q.weights, float(epsilon))


def _check_periodic(field):
    if not all(g.periodic for g in field.grids):
        raise InvalidArgumentError("the DFT pair is only defined on periodic grids")


def dft_forward(field):
    """Semiclassical Fourier coefficients of ``field`` (see module docstring)."""
    _check_periodic(field)
    hbar = field.hbar
    out = field.values
    for axis, g in enumerate(field.grids):
        phase = np.exp(-1j * g.lower * g.wavenumbers())
        shape = [1] * len(field.grids)
        shape[axis] = g.count
        out = np.fft.fft(out, axis=axis) * phase.reshape(shape)
        out = out * g.spacing / np.sqrt(2.0 * np.pi * hbar)
    return out


def dft_inverse(coefficients, grid, hbar):
    """Inverse of :func:`dft_forward`; returns a :class:`WaveField`."""
    grids = _as_grids(grid)
    if not all(g.periodic for g in grids):
        raise InvalidArgumentError("the DFT pair is only defined on periodic grids")
    out = np.asarray(coefficients, dtype=complex)
    for axis, g in enumerate(grids):
        phase = np.exp(1j * g.lower * g.wavenumbers())
        shape = [1] * len(grids)
        shape[axis] = g.count
        out = np.fft.ifft(out * phase.reshape(shape), axis=axis)
        out = out * np.sqrt(2.0 * np.pi * hbar) / g.spacing
    return WaveField(grid, out, hbar)


def hermitian_eigs(matrix, n_lowest=None):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Parameters
    ----------
    matrix : (N, N) array_like
        Dense Hermitian (or real symmetric) matrix.
    n_lowest : int, optional
        Only compute the ``n_lowest`` smallest eigenpairs.  The reduction to
        tridiagonal form still costs O(N^3) but back-substitution is cheaper.

    Raises
    ------
    InvalidArgumentError
        If ``matrix`` is not square or not Hermitian to ``1e-10`` relative.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("hermitian_eigs needs a square matrix")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-10 * max(scale, np.finfo(float).tiny):
        raise InvalidArgumentError("matrix is not Hermitian")
    if n_lowest is None or n_lowest >= a.shape[0]:
        return scipy.linalg.eigh(a)
    return scipy.linalg.eigh(a, subset_by_index=[0, int(n_lowest) - 1], driver="evr")


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth radial cutoff equal to 1 up to ``inner_radius`` and 0 beyond ``outer_radius``."""

    inner_radius: float = 1.0
    outer_radius: float = 2.0

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise InvalidArgumentError("need 0 < inner_radius < outer_radius")

    def __call__(self, t):
        return chi_eval(self, t)


def _bump_exp(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def chi_eval(profile, t):
    """Evaluate the cutoff at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    a = _bump_exp(profile.outer_radius - t)
    b = _bump_exp(t - profile.inner_radius)
    # a + b > 0 everywhere since inner < outer
    out = a / (a + b)
    return float(out) if out.ndim == 0 else out


def check_resolved(value_coarse, value_fine, tolerance, what):
    """Raise :class:`ResolutionError` when a doubling test changes a result too much."""
    scale = max(abs(value_fine), np.finfo(float).tiny)
    change = abs(value_fine - value_coarse) / scale
    if change > tolerance:
        raise ResolutionError(f"{what} not resolved", estimate=change)
    return change
