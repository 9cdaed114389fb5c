"""Analytic identities: Schwarz reconstruction of f'/f, the directional
asymptotic Re(z f'/f) ~ rho h(theta) V(r), a certified logarithmic-derivative
upper bound, and the ray-distributed-zero kernel integral with its closed form.
"""

from __future__ import annotations

import math
from cmath import exp as cmath_exp
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import (
    BandViolation,
    BranchViolation,
    HypothesisFailure,
    NonConvergent,
    SectorViolation,
    ZeroInDisk,
)
from .growth import (
    EpsilonCascade,
    ExactIndicator,
    ProximateOrder,
    log_max_modulus,
    scale_V,
)
from .models import (CanonicalProduct, FunctionModel, counting_function_n,
                     log_derivative)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CircleQuadrature:
    """Equispaced nodes gamma(phi) = center + radius * e^{i phi}."""

    center: complex
    radius: float
    node_count: int

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        m = self.node_count
        if m < 16 or (m & (m - 1)) != 0:
            raise ValueError("node_count must be a power of two, at least 16")

    def angles(self) -> np.ndarray:
        return np.arange(self.node_count) * (_TWO_PI / self.node_count)

    def nodes(self) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * self.angles())


def _circle_winding(model: FunctionModel, quad_circle: CircleQuadrature) -> complex:
    """(1/2 pi i) oint L dz on the circle, by the periodic trapezoid rule."""
    phis = quad_circle.angles()
    lvals, ok = model.log_derivative_many(quad_circle.nodes())
    if not ok.all():
        raise ZeroInDisk("zero of f on or next to the quadrature circle")
    return quad_circle.radius / quad_circle.node_count * np.sum(
        lvals * np.exp(1j * phis))


def schwarz_log_derivative(model: FunctionModel, z: complex, t_r: float,
                           node_count: int = 256) -> complex:
    """Reconstruct L(z) = f'(z)/f(z) from boundary values of log|f|.

    Uses the Schwarz-formula identity
        L(z) = (1 / pi t) * integral of log|f(z + t e^{i phi})| e^{-i phi} dphi,
    valid when f is zero-free on the closed disk of radius t around z. The
    zero-free hypothesis is certified by an argument-principle count on the
    circle; spectral accuracy of the periodic trapezoid rule is certified by
    node doubling.
    """
    circle = CircleQuadrature(complex(z), float(t_r), int(node_count))
    winding = _circle_winding(model, circle)
    if abs(winding) > 0.25:
        raise ZeroInDisk(
            f"argument-principle count {winding:.3f} != 0 on D({z}, {t_r})")

    def reconstruct(m: int) -> complex:
        cq = CircleQuadrature(complex(z), float(t_r), m)
        phis = cq.angles()
        log_abs, _, ok = model.log_eval_many(cq.nodes())
        if not ok.all():
            raise ZeroInDisk("zero hit on the quadrature circle")
        s = np.sum(log_abs * np.exp(-1j * phis))
        return complex(2.0 / (m * t_r) * s)

    coarse = reconstruct(node_count)
    fine = reconstruct(2 * node_count)
    scale = max(abs(fine), 1e-30)
    if abs(fine - coarse) > 1e-6 * scale:
        raise NonConvergent(
            f"Schwarz quadrature changed by {abs(fine - coarse) / scale:.2e} "
            "under node doubling")
    return coarse


@dataclass(frozen=True)
class DirectionalSample:
    """One sample of the asymptotic Re(z L(z)) = rho h(theta) V(r) + O(V eps2)."""

    r: float
    theta: float
    re_zl: float
    predicted: float
    residual: float   # (re_zl - predicted) / (V(r) * eps2(r))


def check_8l(model: FunctionModel, ind: ExactIndicator, po: ProximateOrder,
             cascade: EpsilonCascade,
             samples: Sequence[tuple[float, float]]) -> list[DirectionalSample]:
    """Residuals of Re(z f'/f) against rho*h(theta)*V(r) in eps2 units.

    Every sample must keep angular distance >= 3*eps2(r) from all indicator
    breakpoints (the sector domain of validity); otherwise SectorViolation.
    """
    out = []
    breaks = ind.breakpoints
    for r, theta in samples:
        e2 = cascade.eps2(r)
        dist = min(abs(math.remainder(theta - tb, _TWO_PI)) for tb in breaks)
        if dist < 3.0 * e2:
            raise SectorViolation(
                f"theta = {theta:g} is {dist:.3g} < 3*eps2 = {3 * e2:.3g} "
                f"from a breakpoint at r = {r:g}")
        z = r * complex(math.cos(theta), math.sin(theta))
        re_zl = (z * log_derivative(model, z)).real
        v = scale_V(po, r)
        predicted = po.rho_limit * ind.h(theta) * v
        out.append(DirectionalSample(r, theta, re_zl, predicted,
                                     (re_zl - predicted) / (v * e2)))
    return out


def log_derivative_upper_bound(model: FunctionModel, z: complex,
                               s: float) -> float:
    """Certified upper bound  4s/(s-|z|)^2 * log+ M(s) + sum 2/|z - z_j|.

    The Nevanlinna characteristic is replaced by its standard upper estimate
    log+ M(s, g), which preserves the bound direction. The zero sum runs over
    every zero of modulus <= s; models that cannot enumerate their zeros
    raise IncompleteZeroList.
    """
    if s <= abs(z):
        raise ValueError("need s > |z|")
    zeros = model.zeros_in_disk(s)
    log_m = max(0.0, log_max_modulus(model, s))
    bound = 4.0 * s / (s - abs(z)) ** 2 * log_m
    for zj in zeros:
        d = abs(z - zj)
        if d == 0:
            return math.inf
        bound += 2.0 / d
    return bound


@dataclass(frozen=True)
class KernelIntegralResult:
    quadrature: complex
    closed_form: complex

    @property
    def rel_diff(self) -> float:
        scale = max(abs(self.closed_form), 1e-300)
        return abs(self.quadrature - self.closed_form) / scale


def kernel_integral_I(rho_at_r: float, p: int, z: complex,
                      abs_tol: float = 1e-10) -> KernelIntegralResult:
    """I(z) = integral_0^inf t^rho / (t^{p+1} (t - z)) dt, two independent ways.

    Requires p < rho < p+1 and 0 < arg z < 2 pi. The quadrature route
    substitutes t = |z| e^u (which splits the range at t = |z| and tames both
    endpoints exponentially); the closed form is
        -pi e^{-i pi (rho - p)} / sin(pi (rho - p)) * z^{rho - p - 1}
    on the branch 0 < arg z < 2 pi. Raises NonConvergent if the two routes
    disagree beyond 1e-7 relative.
    """
    lam = rho_at_r - p
    if not (0.0 < lam < 1.0):
        raise ValueError(f"need p < rho(r) < p+1, got rho={rho_at_r}, p={p}")
    if z == 0:
        raise BranchViolation("z = 0 is outside the branch domain")
    theta = math.atan2(z.imag, z.real)
    if theta <= 0.0:
        theta += _TWO_PI
    if not (0.0 < theta < _TWO_PI):
        raise BranchViolation(f"arg z = {theta:g} not in (0, 2*pi)")
    radius = abs(z)

    # closed form, powers on the branch 0 < arg z < 2 pi
    log_z = complex(math.log(radius), theta)
    closed = (-math.pi * np.exp(-1j * math.pi * lam) / math.sin(math.pi * lam)
              * np.exp((lam - 1.0) * log_z))

    # quadrature of R^{lam-1} * e^{u lam} / (e^u - e^{i theta}) over u in R;
    # each half-line uses the algebraic form whose exponentials stay <= 1
    eitheta = complex(math.cos(theta), math.sin(theta))

    def integrand(u: float) -> complex:
        if u >= 0.0:
            return cmath_exp((lam - 1.0) * u) / (1.0 - eitheta * math.exp(-u))
        return cmath_exp(lam * u) / (math.exp(u) - eitheta)

    pieces = []
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        re_val, _ = quad(lambda u: integrand(u).real, lo, hi,
                         epsabs=abs_tol, epsrel=1e-12, limit=400)
        im_val, _ = quad(lambda u: integrand(u).imag, lo, hi,
                         epsabs=abs_tol, epsrel=1e-12, limit=400)
        pieces.append(complex(re_val, im_val))
    quadrature = radius ** (lam - 1.0) * (pieces[0] + pieces[1])

    result = KernelIntegralResult(complex(quadrature), complex(closed))
    if result.rel_diff > 1e-7:
        raise NonConvergent(
            f"kernel integral routes disagree: {result.rel_diff:.2e} relative")
    return result


@dataclass(frozen=True)
class CRGComparison:
    """Measured vs predicted log-modulus for a ray-distributed product.

    ``normalized_residual`` is (measured - predicted)/V(r); ``eps_residual``
    rescales by the theoretical error unit eps(r)**(1/4).
    """

    r: float
    theta: float
    measured: float
    predicted: float
    normalized_residual: float
    eps_residual: float


def verify_crg_ray_product(product: CanonicalProduct, c: float,
                         po: ProximateOrder, cascade: EpsilonCascade,
                         samples: Sequence[tuple[float, float]],
                         declared_constant: float = 1.0) -> list[CRGComparison]:
    """Compare log|f(r e^{i theta})| with c*pi*cos((theta-pi)rho(r))/sin(pi rho(r)) * V(r).

    Preconditions enforced per sample: theta inside the band
    sqrt(eps(r)) <= theta <= 2pi - sqrt(eps(r)) (else BandViolation), zeros on
    the positive ray within the angular envelope, and the counting hypothesis
    |n(r,0) - c*V(r)| <= declared_constant * eps(r) * V(r) (else
    HypothesisFailure).
    """
    angle = product.rule.angle
    if angle != 0.0:
        lim = cascade.eps1(product.rule.modulus(product.cutoff))
        if abs(angle) > lim:
            raise HypothesisFailure(
                f"zero ray angle {angle:g} exceeds the envelope eps = {lim:g}")
    out = []
    for r, theta in samples:
        eps = cascade.eps1(r)
        half_band = math.sqrt(eps)
        if not (half_band <= theta <= _TWO_PI - half_band):
            raise BandViolation(
                f"theta = {theta:g} outside [{half_band:g}, {_TWO_PI - half_band:g}]")
        v = scale_V(po, r)
        n_r = counting_function_n(product, r)
        if abs(n_r - c * v) > declared_constant * eps * v:
            raise HypothesisFailure(
                f"counting deviation |{n_r} - {c * v:.6g}| exceeds "
                f"{declared_constant:g} * eps * V at r = {r:g}")
        rho_r = po.rho_of_r(r)
        predicted = (c * math.pi * math.cos((theta - math.pi) * rho_r)
                     / math.sin(math.pi * rho_r) * v)
        z = r * complex(math.cos(theta), math.sin(theta))
        log_abs, _, ok = product.log_eval_many(np.array([z]))
        if not ok[0]:
            raise ZeroInDisk(f"sample point {z} hit a zero of the product")
        measured = float(log_abs[0])
        resid = (measured - predicted) / v
        out.append(CRGComparison(r, theta, measured, predicted, resid,
                                 resid / eps ** 0.25))
    return out
