"""Growth scales: proximate orders, the epsilon cascade, indicators,
growth minorants and density budgets.

Log-domain evaluation is first-class throughout: a minorant exposes
``log_beta_of_log`` (log beta(r) as a function of log r) so that iterates
beta^n(r0) can be followed far beyond the floating-point range, and a
density budget exposes the matching ``alpha_of_log``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BelowThreshold, NonpositiveInterior, ZeroHit
from .models import FunctionModel

_TWO_PI = 2.0 * math.pi

# log values above this are collapsed to the +inf sentinel when iterating
# a minorant; exp() of anything near it is unrepresentable anyway.
LOG_SENTINEL = 1e300


# ---------------------------------------------------------------------------
# proximate orders

@dataclass(frozen=True)
class ProximateOrder:
    """rho(r) -> rho with rho'(r) r log r -> 0; V(r) = r**rho(r).

    ``derivative_bound`` is a caller-supplied pointwise bound on
    |rho'(r) r log r|; it is accepted as given, not constructed.
    ``rho_of_log`` evaluates rho at r = exp(l) for log-domain work and must
    agree with rho_of_r where both are defined.
    """

    rho_limit: float
    rho_of_r: Callable[[float], float]
    derivative_bound: Callable[[float], float]
    rho_of_log: Callable[[float], float] | None = None
    description: str = ""

    @staticmethod
    def constant(rho: float) -> "ProximateOrder":
        if rho <= 0:
            raise ValueError("order must be positive")
        return ProximateOrder(
            rho_limit=rho,
            rho_of_r=lambda r: rho,
            derivative_bound=lambda r: 0.0,
            rho_of_log=lambda l: rho,
            description=f"constant rho = {rho:g}")

    @staticmethod
    def log_corrected(rho: float, a: float) -> "ProximateOrder":
        """rho(r) = rho + a / log r for r > e, frozen at rho + a below."""
        if rho <= 0:
            raise ValueError("order must be positive")

        def rho_r(r: float) -> float:
            return rho + a / max(math.log(r), 1.0) if r > 0 else rho + a

        def rho_l(l: float) -> float:
            return rho + a / max(l, 1.0)

        def bound(r: float) -> float:
            # |d/dr (a/log r) * r log r| = |a| / log r
            return abs(a) / max(math.log(r), 1.0) if r > 1 else abs(a)

        return ProximateOrder(rho, rho_r, bound, rho_l,
                              f"rho(r) = {rho:g} + {a:g}/log r")

    def check_derivative_bound(self, r_samples: Sequence[float],
                               slack: float = 1e-6) -> bool:
        """Finite-difference audit of |rho'(r) r log r| <= bound(r)."""
        for r in r_samples:
            h = 1e-6 * r
            d = (self.rho_of_r(r + h) - self.rho_of_r(r - h)) / (2 * h)
            if abs(d * r * math.log(r)) > self.derivative_bound(r) + slack:
                return False
        return True


def scale_V(po: ProximateOrder, r: float) -> float:
    """V(r) = r**rho(r)."""
    if r <= 0:
        raise ValueError("r must be positive")
    return math.exp(po.rho_of_r(r) * math.log(r))


# ---------------------------------------------------------------------------
# epsilon cascade

def _iterated_log(x: float, n: int) -> float:
    for _ in range(n):
        if x <= 0.0:
            return -math.inf
        x = math.log(x)
    return x


@dataclass(frozen=True)
class EpsilonCascade:
    """eps1 = 1/log^N(r) with eps2 = sqrt(eps1), eps3 = sqrt(eps2).

    Below the floor exp^N(1) every level is clamped to 1. eps3 is the
    computational primitive and the larger levels are its squares, so the
    identities eps1 = eps2**2 = (eps3**2)**2 hold bit-exactly (eps1 then
    matches 1/log^N(r) to within two roundings).
    """

    N: int

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be a positive integer")

    @property
    def floor_radius(self) -> float:
        x = 1.0
        for _ in range(self.N):
            x = math.exp(x)
        return x

    def eps3_from_log(self, log_r: float) -> float:
        """eps3 evaluated from l = log r (l may exceed the float range of r)."""
        if log_r == math.inf:
            return 0.0
        v = _iterated_log(log_r, self.N - 1)
        return v ** -0.25 if v > 1.0 else 1.0

    def eps2_from_log(self, log_r: float) -> float:
        e3 = self.eps3_from_log(log_r)
        return e3 * e3

    def eps1_from_log(self, log_r: float) -> float:
        e2 = self.eps2_from_log(log_r)
        return e2 * e2

    def eps1(self, r: float) -> float:
        return self.eps1_from_log(_iterated_log(r, 1))

    def eps2(self, r: float) -> float:
        return self.eps2_from_log(_iterated_log(r, 1))

    def eps3(self, r: float) -> float:
        return self.eps3_from_log(_iterated_log(r, 1))


# ---------------------------------------------------------------------------
# indicators

@dataclass(frozen=True)
class SinusoidArc:
    """h(theta) = amplitude * cos(rho*theta + phase) on [theta_lo, theta_hi]."""

    theta_lo: float
    theta_hi: float
    amplitude: float
    phase: float


@dataclass(frozen=True)
class ExactIndicator:
    """Piecewise-sinusoid indicator; arcs partition one full turn."""

    arcs: tuple[SinusoidArc, ...]
    rho: float = 1.0

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(a.theta_lo for a in self.arcs) + (self.arcs[-1].theta_hi,)

    def _locate(self, theta: float) -> SinusoidArc:
        lo = self.arcs[0].theta_lo
        t = lo + math.remainder(theta - lo, _TWO_PI)
        if t < lo:
            t += _TWO_PI
        for arc in self.arcs:
            if t <= arc.theta_hi + 1e-15:
                return arc
        return self.arcs[-1]

    def h(self, theta: float) -> float:
        lo = self.arcs[0].theta_lo
        t = lo + math.remainder(theta - lo, _TWO_PI)
        if t < lo:
            t += _TWO_PI
        arc = self._locate(t)
        return arc.amplitude * math.cos(self.rho * t + arc.phase)

    def zeros(self) -> list[float]:
        """Angles in one period where h vanishes, sorted ascending."""
        out: list[float] = []
        for arc in self.arcs:
            if arc.amplitude == 0.0:
                continue
            k_lo = math.floor((self.rho * arc.theta_lo + arc.phase) / math.pi - 0.5)
            k_hi = math.ceil((self.rho * arc.theta_hi + arc.phase) / math.pi - 0.5)
            for k in range(k_lo, k_hi + 1):
                t = (math.pi / 2 + k * math.pi - arc.phase) / self.rho
                if arc.theta_lo - 1e-12 <= t <= arc.theta_hi + 1e-12:
                    out.append(t)
        out.sort()
        dedup: list[float] = []
        for t in out:
            if not dedup or t - dedup[-1] > 1e-10:
                dedup.append(t)
        return dedup


@dataclass(frozen=True)
class EmpiricalIndicator:
    """Finite-radius limsup proxy sampled on a theta grid.

    ``radii`` records the ladder the max was taken over, making the proxy
    reproducible.
    """

    thetas: np.ndarray
    values: np.ndarray
    radii: tuple[float, ...]

    def h(self, theta: float) -> float:
        t = math.remainder(theta, _TWO_PI)
        if t < 0:
            t += _TWO_PI
        grid = np.concatenate([self.thetas, [self.thetas[0] + _TWO_PI]])
        vals = np.concatenate([self.values, [self.values[0]]])
        return float(np.interp(t, grid, vals))


Indicator = ExactIndicator | EmpiricalIndicator


def _envelope_value(bs: list[complex], theta: float) -> tuple[float, int]:
    best, arg = -math.inf, 0
    for i, b in enumerate(bs):
        v = (b * complex(math.cos(theta), math.sin(theta))).real
        if v > best:
            best, arg = v, i
    return best, arg


def _crossing_angle(ba: complex, bb: complex, lo: float, hi: float) -> float:
    """Angle in [lo, hi] where Re(ba e^{i t}) = Re(bb e^{i t})."""
    d = ba - bb
    d_phase = math.atan2(d.imag, d.real)
    candidates = []
    for offset in (math.pi / 2, -math.pi / 2):
        t = offset - d_phase
        for k in range(-3, 4):
            tt = t + k * _TWO_PI
            if lo - 1e-9 <= tt <= hi + 1e-9:
                candidates.append(tt)
    if not candidates:
        return 0.5 * (lo + hi)
    mid = 0.5 * (lo + hi)
    return min(candidates, key=lambda t: abs(t - mid))


def indicator_exact_expsum(f) -> ExactIndicator:
    """h(theta) = max_k |b_k| cos(theta + arg b_k) for an exponential sum.

    Breakpoints are the crossing angles of the achieving sinusoids; each arc
    carries (A_j, phi_j) = (|b_k|, arg b_k) of the winning exponent.
    """
    bs = f.exponents()
    n_samples = 8192
    thetas = np.arange(n_samples) * (_TWO_PI / n_samples)
    vals = np.stack([(np.asarray(b) * np.exp(1j * thetas)).real for b in bs])
    winners = np.argmax(vals, axis=0)
    switches: list[tuple[float, int, int]] = []   # (crossing angle, from, to)
    for i in range(n_samples):
        a, b = winners[i - 1], winners[i]
        if a != b:
            lo = thetas[i - 1] if i > 0 else thetas[-1] - _TWO_PI
            t = _crossing_angle(bs[a], bs[b], lo, thetas[i])
            switches.append((t % _TWO_PI, a, b))
    if not switches:
        k = winners[0]
        b = bs[k]
        return ExactIndicator(
            arcs=(SinusoidArc(0.0, _TWO_PI, abs(b), math.atan2(b.imag, b.real)),),
            rho=1.0)
    switches.sort()
    arcs = []
    for i, (t0, _, k) in enumerate(switches):
        t1 = switches[(i + 1) % len(switches)][0]
        if i + 1 == len(switches):
            t1 += _TWO_PI
        b = bs[k]
        arcs.append(SinusoidArc(t0, t1, abs(b), math.atan2(b.imag, b.real)))
    return ExactIndicator(arcs=tuple(arcs), rho=1.0)


def indicator_empirical(model: FunctionModel, po: ProximateOrder,
                        theta_grid: Sequence[float],
                        radii: Sequence[float]) -> EmpiricalIndicator:
    """max over the radius ladder of log|f(r e^{i theta})| / V(r).

    Zero-hit samples are skipped; a theta with every radius on a zero raises
    ZeroHit.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("need an increasing ladder of at least 3 radii")
    thetas = np.asarray(list(theta_grid), dtype=float)
    vs = np.array([scale_V(po, r) for r in radii])
    best = np.full(thetas.shape, -np.inf)
    any_ok = np.zeros(thetas.shape, dtype=bool)
    for r, v in zip(radii, vs):
        zs = r * np.exp(1j * thetas)
        log_abs, _, ok = model.log_eval_many(zs)
        cand = np.where(ok, log_abs / v, -np.inf)
        best = np.maximum(best, cand)
        any_ok |= ok
    if not any_ok.all():
        bad = thetas[~any_ok]
        raise ZeroHit(f"all radii hit zeros at theta = {bad[:3]}")
    return EmpiricalIndicator(thetas=thetas, values=best, radii=tuple(radii))


def indicator_lower_bound_check(ind: ExactIndicator,
                                grid_per_arc: int = 10_000) -> list[tuple[float, float, float]]:
    """Largest c_j with h(theta) >= c_j * min(theta - lo, hi - theta) per arc.

    Arcs are taken between consecutive zeros of h. Only arcs with positive
    interior are scored; raises NonpositiveInterior when no such arc exists
    or when an arc mixes signs without a zero crossing at its ends.
    """
    if any(a.theta_hi - a.theta_lo <= 1e-12 for a in ind.arcs):
        raise ValueError("degenerate arc of width zero")
    lo0 = ind.arcs[0].theta_lo
    zeros: list[float] = []
    for t in ind.zeros():
        w = lo0 + math.remainder(t - lo0, _TWO_PI)
        if w < lo0:
            w += _TWO_PI
        if not any(abs(math.remainder(w - u, _TWO_PI)) < 1e-10 for u in zeros):
            zeros.append(w)
    zeros.sort()
    if not zeros:
        # sign-constant indicator: one full-turn arc
        segments = [(lo0, lo0 + _TWO_PI)]
    else:
        segments = [(zeros[i], zeros[i + 1]) for i in range(len(zeros) - 1)]
        segments.append((zeros[-1], zeros[0] + _TWO_PI))
    out: list[tuple[float, float, float]] = []
    for a, b in segments:
        if b - a <= 1e-12:
            raise ValueError("degenerate arc of width zero")
        ts = a + (b - a) * (np.arange(1, grid_per_arc + 1) / (grid_per_arc + 1))
        hs = np.array([ind.h(t) for t in ts])
        if (hs <= 0).all():
            continue
        if (hs <= 0).any():
            raise NonpositiveInterior(
                f"indicator nonpositive inside arc ({a:.6f}, {b:.6f})")
        wedge = np.minimum(ts - a, b - ts)
        out.append((a, b, float(np.min(hs / wedge))))
    if not out:
        raise NonpositiveInterior("indicator has no positive arc")
    return out


# ---------------------------------------------------------------------------
# growth minorants and density budgets

@dataclass(frozen=True)
class GrowthMinorant:
    """Continuous increasing beta with beta(x) > x for x > threshold_x0.

    ``log_beta_of_log`` maps l = log r to log beta(r), so iterates can be
    followed far beyond the float range of r itself. ``fast_escaping_form``
    marks minorants of the shape exp(r^mu-or-larger), for which escape
    upgrades to the fast-escaping regime.
    """

    kind: str
    threshold_x0: float
    log_beta_of_log: Callable[[float], float]
    description: str
    fast_escaping_form: bool = False

    def log_beta(self, r: float) -> float:
        if r <= 0:
            raise ValueError("r must be positive")
        return float(self.log_beta_of_log(math.log(r)))

    def log_beta_many(self, rs: np.ndarray) -> np.ndarray:
        return np.array([self.log_beta(float(r)) for r in np.asarray(rs).ravel()
                         ]).reshape(np.shape(rs))

    def beta(self, r: float) -> float:
        lb = self.log_beta(r)
        return math.exp(lb) if lb < 709.0 else math.inf

    @staticmethod
    def exp_power(c: float, mu: float, threshold_x0: float | None = None) -> "GrowthMinorant":
        """beta(r) = exp(c * r**mu)."""
        if c <= 0 or mu <= 0:
            raise ValueError("c and mu must be positive")

        def lb(l: float) -> float:
            return c * _safe_exp(mu * l)

        if threshold_x0 is None:
            threshold_x0 = _find_threshold(lb)
        return GrowthMinorant("exp-power", threshold_x0, lb,
                              f"beta(r) = exp({c:g} * r**{mu:g})",
                              fast_escaping_form=True)

    @staticmethod
    def growth_scale(po: ProximateOrder, cascade: EpsilonCascade,
                     threshold_x0: float | None = None) -> "GrowthMinorant":
        """beta(r) = exp(r**rho(r) * eps1(r))."""
        rho_l = po.rho_of_log or (lambda l: po.rho_of_r(math.exp(l)))

        def lb(l: float) -> float:
            return _safe_exp(rho_l(l) * l) * cascade.eps1_from_log(l)

        if threshold_x0 is None:
            threshold_x0 = _find_threshold(lb)
        return GrowthMinorant(
            "growth-scale", threshold_x0, lb,
            f"beta(r) = exp(r**rho(r) / log^{cascade.N}(r)), rho -> {po.rho_limit:g}",
            fast_escaping_form=True)

    @staticmethod
    def from_table(rs: Sequence[float], betas: Sequence[float],
                   threshold_x0: float) -> "GrowthMinorant":
        """Piecewise log-log linear interpolation through (r, beta(r)) pairs."""
        ls = np.log(np.asarray(rs, dtype=float))
        lbs = np.log(np.asarray(betas, dtype=float))
        if (np.diff(ls) <= 0).any() or (np.diff(lbs) <= 0).any():
            raise ValueError("table must be strictly increasing in r and beta")

        def lb(l: float) -> float:
            if l >= ls[-1]:   # extrapolate with the final slope
                slope = (lbs[-1] - lbs[-2]) / (ls[-1] - ls[-2])
                return _safe_exp(lbs[-1] + slope * (l - ls[-1]))
            return math.exp(float(np.interp(l, ls, lbs)))

        return GrowthMinorant("table", threshold_x0, lb,
                              f"table minorant on [{rs[0]:g}, {rs[-1]:g}]")


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _find_threshold(log_beta_of_log: Callable[[float], float]) -> float:
    """Smallest grid radius beyond which beta(x) > x, by coarse scan."""
    grid = np.linspace(-14.0, 14.0, 281)   # log r from e^-14 to e^14
    bad = -math.inf
    for l in grid:
        if log_beta_of_log(float(l)) <= l:
            bad = float(l)
    return math.exp(bad) if math.isfinite(bad) else 0.0


@dataclass(frozen=True)
class DensityBudget:
    """Decreasing alpha(r) -> 0 with a log-domain twin for iterated radii."""

    alpha_of_r: Callable[[float], float]
    alpha_of_log: Callable[[float], float]
    description: str = ""

    @staticmethod
    def sector_budget(m_arcs: int, cascade: EpsilonCascade) -> "DensityBudget":
        """alpha(r) = 6 * m * eps3(r/2), one wedge allowance per sector edge."""
        c = 6.0 * m_arcs

        def a_r(r: float) -> float:
            return c * cascade.eps3(r / 2.0)

        def a_l(l: float) -> float:
            return c * cascade.eps3_from_log(l - math.log(2.0))

        return DensityBudget(a_r, a_l, f"alpha(r) = {c:g} * eps3(r/2)")

    @staticmethod
    def from_callable(fn: Callable[[float], float],
                      fn_of_log: Callable[[float], float] | None = None,
                      description: str = "") -> "DensityBudget":
        """Wrap a plain alpha(r); supply ``fn_of_log`` (alpha as a function of
        log r) whenever iterated radii can exceed e**709, otherwise the
        default wrapper saturates there (conservative for convergence
        certificates, but inexact)."""
        if fn_of_log is None:
            fn_of_log = lambda l: fn(math.exp(min(l, 709.0)))
        return DensityBudget(fn, fn_of_log, description)

    def check_decreasing(self, r_samples: Sequence[float]) -> bool:
        vals = [self.alpha_of_r(r) for r in sorted(r_samples)]
        return all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# iteration of the minorant and the series condition

def beta_log_track(beta: GrowthMinorant, r0: float, n: int) -> list[float]:
    """[log r0, log beta(r0), ..., log beta^n(r0)] with +inf sentinel."""
    if r0 <= beta.threshold_x0:
        raise BelowThreshold(
            f"r0 = {r0:g} is not above the minorant threshold {beta.threshold_x0:g}")
    track = [math.log(r0)]
    for _ in range(n):
        l = track[-1]
        if l == math.inf:
            track.append(math.inf)
            continue
        nxt = float(beta.log_beta_of_log(l))
        track.append(math.inf if nxt > LOG_SENTINEL else nxt)
    return track


def beta_iterate(beta: GrowthMinorant, r0: float, n: int) -> float:
    """log beta^n(r0), composed entirely on logarithms."""
    return beta_log_track(beta, r0, n)[n]


@dataclass(frozen=True)
class SeriesCheck:
    converges: bool
    partial_sum: float
    terms_used: int
    terms: tuple[float, ...]


def series_condition_check(alpha: DensityBudget, beta: GrowthMinorant,
                           r0: float, tail_tol: float,
                           max_terms: int = 10_000) -> SeriesCheck:
    """Certify sum_n alpha(beta^n(r0)) < inf by ratio test plus tail tolerance.

    Terms are summed until the current term is below ``tail_tol`` while
    decaying at ratio <= 1/2 from its predecessor (that pair of conditions is
    the certificate), or until ``max_terms``. Non-convergence is a result,
    not an error.
    """
    if r0 <= beta.threshold_x0:
        raise BelowThreshold(
            f"r0 = {r0:g} is not above the minorant threshold {beta.threshold_x0:g}")
    l = math.log(r0)
    total = 0.0
    terms: list[float] = []
    prev = math.inf
    for n in range(max_terms):
        term = float(alpha.alpha_of_log(l))
        total += term
        terms.append(term)
        decayed = (term == 0.0) or (term <= 0.5 * prev)
        if n >= 1 and term < tail_tol and decayed:
            return SeriesCheck(True, total, n + 1, tuple(terms))
        prev = term
        if l != math.inf:
            nxt = float(beta.log_beta_of_log(l))
            l = math.inf if nxt > LOG_SENTINEL else nxt
    return SeriesCheck(False, total, max_terms, tuple(terms))


# ---------------------------------------------------------------------------
# scalar growth diagnostics

def log_max_modulus(model: FunctionModel, r: float, n_angles: int = 2048) -> float:
    """log M(r, f) estimated as the max of log|f| over an angle grid."""
    thetas = np.arange(n_angles) * (_TWO_PI / n_angles)
    log_abs, _, ok = model.log_eval_many(r * np.exp(1j * thetas))
    vals = np.where(ok, log_abs, -np.inf)
    return float(np.max(vals))


def zheng_ratio(model: FunctionModel, r_list: Sequence[float],
                n_angles: int = 2048) -> float:
    """min over the list of log M(2r) / log M(r), a d > 1 certificate."""
    rs = [float(r) for r in r_list]
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("r_list must be increasing")
    best = math.inf
    for r in rs:
        m1 = log_max_modulus(model, r, n_angles)
        if m1 <= 0:
            raise ValueError(f"M(r) <= 1 at r = {r:g}; ratio undefined")
        best = min(best, log_max_modulus(model, 2 * r, n_angles) / m1)
    return best


@dataclass(frozen=True)
class ProxOrderReport:
    rows: tuple[tuple[float, float, float, float], ...]  # (r, s/r, prox1, prox2)
    max_prox1_deviation: float
    max_prox2_residual: float


def prox_order_properties(po: ProximateOrder, r_list: Sequence[float],
                          s_over_r_list: Sequence[float]) -> ProxOrderReport:
    """Deviations in V(s)/V(r) = 1 + o(1) and its first-order expansion.

    prox1 row entry: |V(s)/V(r) - 1|; prox2 entry:
    |V(s)/V(r) - 1 - rho (s/r - 1)|, for regression tracking.
    """
    rows = []
    rho = po.rho_limit
    for r in r_list:
        vr = scale_V(po, r)
        for q in s_over_r_list:
            ratio = scale_V(po, q * r) / vr
            p1 = abs(ratio - 1.0)
            p2 = abs(ratio - 1.0 - rho * (q - 1.0))
            rows.append((float(r), float(q), p1, p2))
    return ProxOrderReport(
        rows=tuple(rows),
        max_prox1_deviation=max(p for *_, p, _ in rows) if rows else 0.0,
        max_prox2_residual=max(p for *_, p in rows) if rows else 0.0)
