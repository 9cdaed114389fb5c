"""Concrete entire-function models with overflow-safe log-space evaluation.

Two families are supported:

* exponential sums  f(z) = sum_k P_k(z) * exp(b_k z)  with polynomial
  coefficients P_k and pairwise distinct exponents b_k;
* canonical products f(z) = prod_k E(z / a_k, p) over a rule-generated zero
  sequence a_k = c * k**e * exp(i*theta0), truncated at a certified cutoff.

The primary representation of a value is its logarithm: ``LogEval`` carries
log|f(z)| and the argument of f(z) mod 2*pi, so quantities such as |f(z)|
versus beta(|z|) stay comparable long after exp() would overflow.
"""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    ContourTooClose,
    IncompleteZeroList,
    NearZero,
    NonIntegerResidue,
    OverflowUnrepresentable,
    ZeroHit,
)

# A value whose log-modulus falls below this is treated as a zero hit:
# log of the smallest positive normal double, plus 50 for slack.
ZERO_HIT_LOG = math.log(sys.float_info.min) + 50.0

# Relative cancellation below which the logarithmic derivative is refused.
_NEAR_ZERO_REL = 1e-6

_TWO_PI = 2.0 * math.pi


def _wrap_phase(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    y = math.remainder(x, _TWO_PI)
    if y <= -math.pi:
        y += _TWO_PI
    return y


@dataclass(frozen=True)
class LogEval:
    """log|f(z)| plus the argument of f(z); ``valid`` is False on a zero hit."""

    log_abs: float
    phase: float
    valid: bool = True

    def to_complex(self) -> complex:
        """exp(log_abs + i*phase); inf/0 outside the representable range."""
        mag = math.exp(self.log_abs) if self.log_abs < 709.0 else math.inf
        return complex(mag * math.cos(self.phase), mag * math.sin(self.phase))


class ExponentialSum:
    """f(z) = sum_k P_k(z) exp(b_k z), coefficients ascending by degree.

    Terms whose polynomial is identically zero are dropped at construction;
    the exponents of the remaining terms must be pairwise distinct.
    """

    def __init__(self, terms: Iterable[tuple[Sequence[complex], complex]]):
        cleaned: list[tuple[tuple[complex, ...], complex]] = []
        for coeffs, b in terms:
            tup = tuple(complex(c) for c in coeffs)
            while tup and tup[-1] == 0:
                tup = tup[:-1]
            if tup:
                cleaned.append((tup, complex(b)))
        if not cleaned:
            raise ValueError("exponential sum needs at least one nonzero term")
        exps = [b for _, b in cleaned]
        if len({(b.real, b.imag) for b in exps}) != len(exps):
            raise ValueError("exponents must be pairwise distinct")
        self.terms: tuple[tuple[tuple[complex, ...], complex], ...] = tuple(cleaned)

    def __repr__(self) -> str:
        parts = [f"{list(c)}*exp({b}z)" for c, b in self.terms]
        return "ExponentialSum(" + " + ".join(parts) + ")"

    def exponents(self) -> list[complex]:
        return [b for _, b in self.terms]

    def _poly_values(self, zs: np.ndarray) -> list[np.ndarray]:
        """Horner evaluation of every coefficient polynomial."""
        out = []
        with np.errstate(over="ignore", invalid="ignore"):
            for coeffs, _ in self.terms:
                acc = np.full(zs.shape, coeffs[-1], dtype=np.complex128)
                for c in reversed(coeffs[:-1]):
                    acc = acc * zs + c
                out.append(acc)
        return out

    def plain_values(self, zs: np.ndarray) -> np.ndarray:
        """Direct complex evaluation; overflows to inf/nan silently."""
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(over="ignore", invalid="ignore"):
            acc = np.zeros(zs.shape, dtype=np.complex128)
            for pv, (_, b) in zip(self._poly_values(zs), self.terms):
                acc = acc + pv * np.exp(b * zs)
        return acc

    def log_eval_many(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorised log-sum-exp evaluation.

        Returns (log_abs, phase, valid). The complex log of the dominant
        term is factored out, so |Re(b_k z)| up to 1e8 stays representable.
        """
        zs = np.asarray(zs, dtype=np.complex128)
        n = len(self.terms)
        pv = self._poly_values(zs)
        # log-magnitude and full complex log of each term
        re = np.empty((n,) + zs.shape)
        logs = np.empty((n,) + zs.shape, dtype=np.complex128)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k, ((_, b), p) in enumerate(zip(self.terms, pv)):
                w = b * zs
                lp = np.log(np.abs(p))
                re[k] = lp + w.real
                logs[k] = lp + 1j * np.angle(p) + w
        re = np.where(np.isnan(re), -np.inf, re)
        kstar = np.argmax(re, axis=0)
        cstar = np.take_along_axis(logs, kstar[None, ...], axis=0)[0]
        finite = np.isfinite(cstar.real)
        # a +inf dominant log-term is an overflow of the log scale itself,
        # not a zero hit; surface it as log_abs = +inf with valid=True
        blown = cstar.real == np.inf
        cref = np.where(finite, cstar, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            s = np.exp(logs - cref[None, ...])
            s = np.where(np.isfinite(s), s, 0.0)
            total = s.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_abs = cref.real + np.log(np.abs(total))
        phase = np.angle(total) + cref.imag
        phase = np.remainder(phase + math.pi, _TWO_PI) - math.pi
        phase = np.where(phase == -math.pi, math.pi, phase)
        valid = finite & (log_abs >= ZERO_HIT_LOG)
        log_abs = np.where(valid, log_abs, -np.inf)
        log_abs = np.where(blown, np.inf, log_abs)
        valid = valid | blown
        phase = np.where(valid & ~blown, phase, 0.0)
        return log_abs, phase, valid

    def log_derivative_many(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised f'/f as a ratio of shifted sums sharing one exponent scale.

        Returns (L, ok); ok is False where the denominator cancels below the
        near-zero guard.
        """
        zs = np.asarray(zs, dtype=np.complex128)
        mu = np.full(zs.shape, -np.inf)
        for _, b in self.terms:
            mu = np.maximum(mu, (b * zs).real)
        num = np.zeros(zs.shape, dtype=np.complex128)
        den = np.zeros(zs.shape, dtype=np.complex128)
        scale = np.zeros(zs.shape)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            for coeffs, b in self.terms:
                p = np.full(zs.shape, coeffs[-1], dtype=np.complex128)
                dp = np.zeros(zs.shape, dtype=np.complex128)
                for c in reversed(coeffs[:-1]):
                    dp = dp * zs + p
                    p = p * zs + c
                w = np.exp(b * zs - mu)
                den = den + p * w
                num = num + (dp + b * p) * w
                scale = np.maximum(scale, np.abs(p * w))
        ok = np.abs(den) > _NEAR_ZERO_REL * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
        return ratio, ok

    def zeros_in_disk(self, radius: float) -> list[complex]:
        """Zeros with |z| <= radius; only available for one-term sums."""
        if len(self.terms) > 1:
            raise IncompleteZeroList(
                "multi-term exponential sums have infinitely many zeros; "
                "no finite enumeration is available")
        coeffs, _ = self.terms[0]
        if len(coeffs) == 1:
            return []
        roots = np.roots(list(reversed(coeffs)))
        return [complex(r) for r in roots if abs(r) <= radius * (1 + 1e-12)]


@dataclass(frozen=True)
class PowerZeroRule:
    """Zero modulus rule |a_k| = scale * k**exponent on the ray of ``angle``."""

    exponent: float
    scale: float = 1.0
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.exponent <= 0 or self.scale <= 0:
            raise ValueError("zero rule needs positive scale and exponent")

    def modulus(self, k: float) -> float:
        return self.scale * k ** self.exponent

    def zeros(self, k_lo: int, k_hi: int) -> np.ndarray:
        ks = np.arange(k_lo, k_hi + 1, dtype=np.float64)
        return (self.scale * ks ** self.exponent) * cmath.exp(1j * self.angle)

    @property
    def convergence_exponent(self) -> float:
        """Exponent of the counting function n(r) ~ (r/scale)**(1/e)."""
        return 1.0 / self.exponent


class CanonicalProduct:
    """Truncated Weierstrass product over a rule-generated zero sequence.

    The cutoff K is fixed at construction so that the certified tail estimate

        sum_{k>K} (2/(p+1)) |z/a_k|**(p+1)  <=  tail_tol

    holds for every |z| <= r_max, and |z/a_{K+1}| <= 1/2 so the per-factor
    series bound applies. The resulting bound is stored in ``tail_bound``
    and never recomputed per call. A (tail_tol, r_max) pair whose cutoff
    would exceed ``max_cutoff`` factors is refused up front.
    """

    _CHUNK = 1 << 19

    def __init__(self, rule: PowerZeroRule, genus: int, tail_tol: float,
                 r_max: float, max_cutoff: int = 200_000_000):
        if genus < 0:
            raise ValueError("genus must be nonnegative")
        s = rule.exponent * (genus + 1)
        if s <= 1.0:
            raise ValueError(
                "genus+1 must exceed the convergence exponent of the zero rule")
        if tail_tol <= 0 or r_max <= 0:
            raise ValueError("tail_tol and r_max must be positive")
        self.rule = rule
        self.genus = int(genus)
        self.tail_tol = float(tail_tol)
        self.r_max = float(r_max)
        k_half = math.ceil((2.0 * r_max / rule.scale) ** (1.0 / rule.exponent))
        c = (2.0 / (genus + 1)) * (r_max / rule.scale) ** (genus + 1) / (s - 1.0)
        k_tol = math.ceil(c ** (1.0 / (s - 1.0)) / tail_tol ** (1.0 / (s - 1.0)))
        cutoff = max(k_half, k_tol, 1)
        if cutoff > max_cutoff:
            raise ValueError(
                f"tail tolerance {tail_tol:g} at r_max {r_max:g} needs "
                f"{cutoff:.2e} factors (> {max_cutoff:.0e}); relax the "
                "tolerance or reduce r_max")
        self.cutoff = cutoff
        self.tail_bound = self._tail_estimate(r_max, self.cutoff)

    def _tail_estimate(self, r: float, k: int) -> float:
        s = self.rule.exponent * (self.genus + 1)
        p1 = self.genus + 1
        return (2.0 / p1) * (r / self.rule.scale) ** p1 * k ** (1.0 - s) / (s - 1.0)

    def derivative_tail_bound(self, r: float) -> float:
        """Certified truncation bound for f'/f at |z| = r <= r_max."""
        s = self.rule.exponent * (self.genus + 1)
        p = self.genus
        return (2.0 * r ** p / self.rule.scale ** (p + 1)
                * self.cutoff ** (1.0 - s) / (s - 1.0))

    def _check_radius(self, r: float) -> None:
        if r > self.r_max * (1 + 1e-12):
            raise ValueError(
                f"|z| = {r:g} exceeds the certified radius r_max = {self.r_max:g}")

    def zeros_in_disk(self, radius: float) -> list[complex]:
        n = self.counting_function(radius)
        return [complex(z) for z in self.rule.zeros(1, n)] if n else []

    def counting_function(self, r: float) -> int:
        """Exact number of generated zeros with |a_k| <= r."""
        if r <= 0:
            return 0
        k = int((r / self.rule.scale) ** (1.0 / self.rule.exponent))
        while self.rule.modulus(k + 1) <= r:
            k += 1
        while k > 0 and self.rule.modulus(k) > r:
            k -= 1
        return k

    def _z_blocks(self, flat: np.ndarray):
        """Yield index slices so block_size * zero_chunk stays bounded."""
        zero_chunk = min(self._CHUNK, self.cutoff)
        block = max(1, (1 << 22) // zero_chunk)
        for lo in range(0, flat.size, block):
            yield slice(lo, min(lo + block, flat.size))

    def log_eval_many(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Truncated sum of log E(z/a_k, p); accurate to within tail_bound."""
        zs = np.asarray(zs, dtype=np.complex128)
        flat = zs.ravel()
        if flat.size:
            self._check_radius(float(np.max(np.abs(flat))))
        p = self.genus
        log_abs = np.zeros(flat.shape)
        phase = np.zeros(flat.shape)
        hit = np.zeros(flat.shape, dtype=bool)
        for blk in self._z_blocks(flat):
            zb = flat[blk]
            for lo in range(1, self.cutoff + 1, self._CHUNK):
                hi = min(lo + self._CHUNK - 1, self.cutoff)
                a = self.rule.zeros(lo, hi)
                u = zb[:, None] / a[None, :]
                one_m = 1.0 - u
                mag = np.abs(one_m)
                hit[blk] |= (mag == 0.0).any(axis=1)
                with np.errstate(divide="ignore"):
                    term_log = np.log(mag)
                term_arg = np.angle(one_m)
                if p > 0:
                    upow = u.copy()
                    for j in range(1, p + 1):
                        term_log = term_log + upow.real / j
                        term_arg = term_arg + upow.imag / j
                        if j < p:
                            upow = upow * u
                log_abs[blk] += term_log.sum(axis=1)
                phase[blk] += term_arg.sum(axis=1)
        valid = ~hit & (log_abs >= ZERO_HIT_LOG)
        log_abs = np.where(valid, log_abs, -np.inf)
        phase = np.remainder(phase + math.pi, _TWO_PI) - math.pi
        phase = np.where(phase == -math.pi, math.pi, phase)
        phase = np.where(valid, phase, 0.0)
        return (log_abs.reshape(zs.shape), phase.reshape(zs.shape),
                valid.reshape(zs.shape))

    def log_derivative_many(self, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """sum_k z**p / (a_k**p (z - a_k)) over the stored cutoff."""
        zs = np.asarray(zs, dtype=np.complex128)
        flat = zs.ravel()
        if flat.size:
            self._check_radius(float(np.max(np.abs(flat))))
        p = self.genus
        total = np.zeros(flat.shape, dtype=np.complex128)
        ok = np.ones(flat.shape, dtype=bool)
        for blk in self._z_blocks(flat):
            zb = flat[blk]
            for lo in range(1, self.cutoff + 1, self._CHUNK):
                hi = min(lo + self._CHUNK - 1, self.cutoff)
                a = self.rule.zeros(lo, hi)
                diff = zb[:, None] - a[None, :]
                ok[blk] &= (np.abs(diff) > 1e-9 * np.abs(a)[None, :]).all(axis=1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    if p == 0:
                        contrib = 1.0 / diff
                    else:
                        contrib = zb[:, None] ** p / (a[None, :] ** p * diff)
                    contrib = np.where(np.isfinite(contrib), contrib, 0.0)
                total[blk] += contrib.sum(axis=1)
        total = np.where(ok, total, 0.0)
        return total.reshape(zs.shape), ok.reshape(zs.shape)

    def plain_values(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=np.complex128)
        log_abs, phase, valid = self.log_eval_many(zs)
        with np.errstate(over="ignore"):
            mag = np.exp(log_abs)
        vals = mag * (np.cos(phase) + 1j * np.sin(phase))
        return np.where(valid, vals, 0.0)

    def __repr__(self) -> str:
        return (f"CanonicalProduct(rule={self.rule}, genus={self.genus}, "
                f"cutoff={self.cutoff}, tail_bound={self.tail_bound:.3e})")


FunctionModel = Union[ExponentialSum, CanonicalProduct]


def eval_log(model: FunctionModel, z: complex) -> LogEval:
    """Overflow-safe evaluation of log f(z).

    Returns a LogEval with ``valid=False`` and log_abs = -inf when z lies on
    a zero of f within the zero-hit tolerance. Raises OverflowUnrepresentable
    if even the log-modulus leaves the binary64 range.
    """
    la, ph, valid = model.log_eval_many(np.array([z], dtype=np.complex128))
    log_abs, phase, ok = float(la[0]), float(ph[0]), bool(valid[0])
    if ok and not math.isfinite(log_abs):
        raise OverflowUnrepresentable(f"log|f| not representable at z={z}")
    if not ok:
        return LogEval(-math.inf, 0.0, False)
    return LogEval(log_abs, phase, True)


def log_derivative(model: FunctionModel, z: complex) -> complex:
    """L(z) = f'(z)/f(z); raises NearZero within the guard distance of a zero."""
    val, ok = model.log_derivative_many(np.array([z], dtype=np.complex128))
    if not bool(ok[0]):
        raise NearZero(f"logarithmic derivative undefined near a zero at z={z}")
    return complex(val[0])


def counting_function_n(product: CanonicalProduct, r: float) -> int:
    """n(r, 0): exact zero count of the product rule up to modulus r."""
    if r <= 0:
        raise ValueError("r must be positive")
    return product.counting_function(r)


def _gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def count_zeros_argument_principle(model: FunctionModel,
                                   rectangle: tuple[float, float, float, float],
                                   nodes_per_side: int = 128) -> int:
    """Zero count (with multiplicity) inside a rectangle via (1/2pi i) @ L dz.

    Gauss-Legendre quadrature per side; the result must land within 0.1 of
    an integer, else NonIntegerResidue. A zero within the near-zero guard of
    the contour raises ContourTooClose.
    """
    x0, x1, y0, y1 = rectangle
    if not (x1 > x0 and y1 > y0):
        raise ValueError("rectangle must be nondegenerate")
    xi, wi = _gauss_nodes(nodes_per_side)
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = 0.0 + 0.0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        mid = (a + b) / 2.0
        half = (b - a) / 2.0
        zs = mid + half * xi
        lvals, ok = model.log_derivative_many(zs)
        if not ok.all():
            raise ContourTooClose("zero of f within guard distance of contour")
        total += half * np.sum(wi * lvals)
    winding = total / (2.0j * math.pi)
    nearest = round(winding.real)
    if abs(winding - nearest) > 0.1:
        raise NonIntegerResidue(
            f"contour integral {winding} is not close to an integer")
    return int(nearest)


# ---------------------------------------------------------------------------
# convenience constructors

def exp_z() -> ExponentialSum:
    """f(z) = e**z."""
    return ExponentialSum([([1.0], 1.0)])


def sin_z() -> ExponentialSum:
    """sin z = (-i/2) e^{iz} + (i/2) e^{-iz}."""
    return ExponentialSum([([-0.5j], 1j), ([0.5j], -1j)])


def cos_z() -> ExponentialSum:
    """cos z = (1/2) e^{iz} + (1/2) e^{-iz}."""
    return ExponentialSum([([0.5], 1j), ([0.5], -1j)])


def cosh_z() -> ExponentialSum:
    """cosh z = (1/2) e^{z} + (1/2) e^{-z}."""
    return ExponentialSum([([0.5], 1.0), ([0.5], -1.0)])
