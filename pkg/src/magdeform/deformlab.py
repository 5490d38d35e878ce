"""Model-independent pieces of the deformation experiments.

* admissibility of a magnetic family (the ``n x k`` first variation must be
  onto at every point),
* ball averages and the two-sided band statistics,
* restriction integrals over curves, the iterated-integral (Fubini) check
  and the Markov good-set construction.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateBandError,
    InconsistentFamilyError,
    InvalidArgumentError,
    OrderSwapError,
    ResolutionError,
)
from .numerics import IntervalQuadrature, gauss_legendre

__all__ = [
    "MagneticFamily",
    "OperatorSymbol",
    "AdmissibilityReport",
    "AverageProfile",
    "BandReport",
    "Curve",
    "RestrictionReport",
    "jacobian_du",
    "admissibility_check",
    "average_over_ball",
    "two_sided_band",
    "restriction_integral",
    "fubini_check",
    "good_set_fraction",
]

DEFAULT_ADMISSIBILITY_THRESHOLD = 1e-3


@dataclass(frozen=True)
class MagneticFamily:
    """Components ``omega_j(x, u)`` of a family of one-forms, ``x`` in R^n, ``u`` in R^k."""

    space_dim: int
    param_dim: int
    component_eval: Callable
    jacobian_eval: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        if self.space_dim < 1 or self.param_dim < self.space_dim:
            raise InvalidArgumentError("need 1 <= space_dim <= param_dim")

    def __call__(self, x, u):
        return np.asarray(self.component_eval(np.asarray(x, float), np.asarray(u, float)), float)

    def vanishes_at_zero(self, x_samples, atol=1e-14):
        zero = np.zeros(self.param_dim)
        return all(np.max(np.abs(self(x, zero))) <= atol for x in np.atleast_2d(x_samples))


@dataclass(frozen=True)
class OperatorSymbol:
    """Principal symbol ``p_u(x, xi) = (xi + omega)^T g^{-1} (xi + omega) + V(x)``.

    ``metric_eval(x)`` returns the inverse metric ``g^{ij}``.
    """

    family: MagneticFamily
    metric_eval: Callable = None
    potential_eval: Callable = None

    def inverse_metric(self, x):
        n = self.family.space_dim
        return np.eye(n) if self.metric_eval is None else np.asarray(self.metric_eval(x), float)

    def __call__(self, x, xi, u):
        shifted = np.asarray(xi, float) + self.family(x, u)
        v = 0.0 if self.potential_eval is None else float(self.potential_eval(x))
        return float(shifted @ self.inverse_metric(x) @ shifted + v)

    def mixed_hessian(self, x, u, step=1e-5):
        """``d_u d_xi p_u = 2 g^{-1} d_u omega`` (independent of ``xi``)."""
        return 2.0 * self.inverse_metric(x) @ jacobian_du(self.family, x, u, step)


def jacobian_du(family, x, u, step=1e-5):
    """Central-difference Jacobian ``d omega_i / d u_j`` (shape ``n x k``).

    When the family carries an analytic Jacobian the two are compared; the
    allowed discrepancy is the larger of the truncation bound ``10 step^2``
    and the rounding floor ``100 eps / step``, relative to ``max(1, |J|)``.
    """
    if not 1e-7 <= step <= 1e-3:
        raise InvalidArgumentError("finite-difference step must lie in [1e-7, 1e-3]")
    u = np.asarray(u, dtype=float)
    jac = np.empty((family.space_dim, family.param_dim))
    for j in range(family.param_dim):
        e = np.zeros_like(u)
        e[j] = step
        jac[:, j] = (family(x, u + e) - family(x, u - e)) / (2 * step)
    if family.jacobian_eval is not None:
        exact = np.asarray(family.jacobian_eval(np.asarray(x, float), u), float)
        scale = max(1.0, float(np.max(np.abs(exact))))
        tol = max(10 * step**2, 100 * np.finfo(float).eps / step) * scale
        gap = float(np.max(np.abs(exact - jac)))
        if gap > tol:
            raise InconsistentFamilyError(
                f"analytic and numerical Jacobians differ by {gap:.3e} (tolerance {tol:.3e})"
            )
    return jac


@dataclass(frozen=True)
class AdmissibilityReport:
    min_singular_value: float
    worst_point: tuple
    chosen_subset: tuple
    threshold: float

    @property
    def admissible(self):
        return self.threshold > 0 and self.min_singular_value >= self.threshold


def _best_subset(jac):
    n, k = jac.shape
    best, best_det = None, -1.0
    scale = max(1.0, float(np.max(np.abs(jac)))) ** n
    for cols in itertools.combinations(range(k), n):
        d = abs(np.linalg.det(jac[:, cols]))
        # strict improvement beyond rounding keeps the lexicographically first maximizer
        if d > best_det + 1e-12 * scale:
            best, best_det = cols, d
    return best


def admissibility_check(family, x_samples, u_samples, threshold=DEFAULT_ADMISSIBILITY_THRESHOLD, step=1e-5):
    """Smallest singular value of the first variation over all sample pairs.

    ``chosen_subset`` lists (0-based) the ``n`` parameter indices whose
    square minor has the largest ``|det|`` at the worst point; ties go to the
    lexicographically smallest index tuple.
    """
    xs = np.atleast_2d(np.asarray(x_samples, float))
    us = np.atleast_2d(np.asarray(u_samples, float))
    if xs.size == 0 or us.size == 0:
        raise InvalidArgumentError("admissibility needs nonempty samples")
    worst, worst_sigma, worst_jac = None, np.inf, None
    for x in xs:
        for u in us:
            jac = jacobian_du(family, x, u, step)
            sigma = float(np.linalg.svd(jac, compute_uv=False)[-1])
            if sigma < worst_sigma:
                worst, worst_sigma, worst_jac = (x.copy(), u.copy()), sigma, jac
    return AdmissibilityReport(worst_sigma, worst, _best_subset(worst_jac), float(threshold))


@dataclass(eq=False)
class AverageProfile:
    """Averaged intensities ``I(hbar, ., x)`` at a set of points."""

    hbar: float
    x_samples: np.ndarray
    values: np.ndarray
    in_band: np.ndarray = None

    def __post_init__(self):
        self.x_samples = np.atleast_1d(np.asarray(self.x_samples, float))
        self.values = np.atleast_1d(np.asarray(self.values, float))
        if self.in_band is None:
            self.in_band = np.ones(self.values.shape, dtype=bool)
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("averaged intensities must be finite")

    @property
    def band(self):
        return float(self.values.min()), float(self.values.max())


def average_over_ball(intensity, quad):
    """``sum_m w_m intensity(u_m)`` over a ball (or interval) quadrature.

    ``intensity`` is a callable of one parameter vector or an array of
    precomputed node values.
    """
    nodes = np.asarray(quad.nodes)
    if callable(intensity):
        values = np.array([intensity(u) for u in nodes], dtype=float)
    else:
        values = np.asarray(intensity, dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise InvalidArgumentError(f"non-finite intensity at node {bad[0]} (u = {nodes[bad[0]]})")
    return float(np.dot(quad.weights, values))


@dataclass(frozen=True)
class BandReport:
    lower: float
    upper: float
    ratio: float
    bound: float

    @property
    def bounded(self):
        return self.ratio <= self.bound


def two_sided_band(profiles, bound=2.0):
    """``C1 = min``, ``C2 = max`` of all profile values and the ratio ``C2/C1``."""
    if len(profiles) < 3:
        raise InvalidArgumentError("a band needs at least three profiles")
    values = np.concatenate([np.atleast_1d(p.values) for p in profiles])
    lo, hi = float(values.min()), float(values.max())
    if not lo > 0:
        raise DegenerateBandError(f"profiles reach {lo}; the lower constant must be positive")
    return BandReport(lo, hi, hi / lo, float(bound))


@dataclass(frozen=True)
class Curve:
    """Parametrized curve ``t in [0, 1] -> point`` with its own quadrature.

    ``speed_eval(t)`` is the length element; a point is the degenerate
    curve with one node of weight one and unit speed (counting measure).
    """

    point_eval: Callable
    speed_eval: Callable
    quadrature: IntervalQuadrature

    @classmethod
    def segment(cls, start, end, n=64):
        start, end = np.asarray(start, float), np.asarray(end, float)
        d = end - start
        length = float(np.linalg.norm(d))
        return cls(
            lambda t: start + np.multiply.outer(np.asarray(t), d),
            lambda t: np.full(np.shape(t), length),
            gauss_legendre(n, 0.0, 1.0),
        )

    @classmethod
    def point(cls, x0):
        x0 = np.asarray(x0, float)
        return cls(
            lambda t: np.broadcast_to(x0, np.shape(t) + x0.shape).copy(),
            lambda t: np.ones(np.shape(t)),
            IntervalQuadrature(np.array([0.0]), np.array([1.0])),
        )

    def nodes(self):
        t = self.quadrature.nodes
        return self.point_eval(t), self.quadrature.weights * self.speed_eval(t)

    def length(self):
        return float(np.sum(self.nodes()[1]))

    def max_gap(self):
        pts, _ = self.nodes()
        if len(pts) < 2:
            return 0.0
        pts = pts.reshape(len(pts), -1)
        inner = np.linalg.norm(np.diff(pts, axis=0), axis=1).max()
        ends = np.linalg.norm(pts[[0, -1]] - self.point_eval(np.array([0.0, 1.0])).reshape(2, -1), axis=1)
        return float(max(inner, 2 * ends.max()))


def restriction_integral(state_eval, curve, hbar=None, wavenumber_bound=None):
    """``sum_j w_j |state(point(t_j))|^2 speed(t_j)``.

    If ``hbar`` and ``wavenumber_bound`` (a bound on ``|d phase|``) are given,
    node spacing must not exceed ``hbar / (4 * wavenumber_bound)``.
    """
    if hbar is not None and wavenumber_bound:
        limit = hbar / (4 * wavenumber_bound)
        gap = curve.max_gap()
        if gap > limit:
            raise ResolutionError(f"curve nodes {gap:.3g} apart exceed {limit:.3g}", estimate=gap)
    pts, w = curve.nodes()
    vals = np.asarray(state_eval(pts))
    return float(np.dot(w, np.abs(vals) ** 2))


def fubini_check(per_u, quad, swapped, tol=1e-8):
    """Gap between ``sum_m w_m per_u[m]`` and the independently ordered ``swapped``."""
    iterated = float(np.dot(quad.weights, np.asarray(per_u, float)))
    gap = abs(iterated - swapped)
    if gap > tol * max(1.0, abs(swapped)):
        raise OrderSwapError(f"iterated integrals differ by {gap:.3e}")
    return gap


@dataclass(frozen=True, eq=False)
class RestrictionReport:
    per_u_values: np.ndarray
    iterated_value: float
    omega: float
    good_fraction: float
    threshold: float
    good_mask: np.ndarray = field(repr=False, default=None)


def good_set_fraction(values, weights, omega):
    """Weighted fraction of parameters with ``F(u) <= mean(F) / omega``.

    By Markov's inequality the excluded weight is at most ``omega`` times
    the total, so the fraction is always at least ``1 - omega``.
    """
    if not 0 < omega < 1:
        raise InvalidArgumentError("omega must lie in (0, 1)")
    f = np.asarray(values, float)
    w = np.asarray(weights, float)
    if np.any(f < 0):
        raise InvalidArgumentError("restriction values must be nonnegative")
    total = float(np.sum(w))
    iterated = float(np.dot(w, f))
    threshold = iterated / total / omega
    # compare on max-normalized values so subnormal inputs do not underflow the mean;
    # the few-ulp slack absorbs rounding in the weighted sum
    peak = float(f.max()) if f.size else 0.0
    if peak > 0:
        fs = f / peak
        good = fs <= float(np.dot(w, fs)) / total / omega * (1 + 8 * np.finfo(float).eps)
    else:
        good = np.ones(f.shape, bool)
    return RestrictionReport(f, iterated, float(omega), float(np.sum(w[good]) / total), threshold, good)
