"""Membership tests for the escape-criteria sets A and B, and Lebesgue
density estimation over annuli and windows.

A point belongs to A when Re(z f'(z)/f(z)) > 64 and |f(z)| > beta(|z|); it
belongs to B when additionally Re(zeta f'(zeta)/f(zeta)) > 0 throughout the
protective disk |zeta - z| < 32 |f(z)/f'(z)|. The disk condition is certified
by structured sampling (8 concentric circles plus the center), never proved;
verdicts record that they are sampling certificates.

Sampling is deterministic: Monte Carlo draws come from a counter-based Philox
stream keyed by the seed, so the sample at index i is a pure function of
(seed, i) and results are bit-identical under any parallel schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .growth import DensityBudget, GrowthMinorant
from .models import FunctionModel
from .parallel import map_chunked

_TWO_PI = 2.0 * math.pi

# default thresholds defining the escape-criteria sets A and B
A_THRESHOLD = 64.0
B_RADIUS_FACTOR = 32.0


@dataclass(frozen=True)
class AnnulusSpec:
    """The annulus r/2 < |z| < 2r."""

    r: float

    def __post_init__(self) -> None:
        if self.r <= 0:
            raise ValueError("annulus radius must be positive")

    @property
    def inner(self) -> float:
        return self.r / 2.0

    @property
    def outer(self) -> float:
        return 2.0 * self.r

    @property
    def area(self) -> float:
        return 15.0 * math.pi * self.r ** 2 / 4.0

    def region_dict(self) -> dict:
        return {"kind": "annulus", "r": self.r}


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("window must be nondegenerate")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def region_dict(self) -> dict:
        return {"kind": "window", "x0": self.x0, "x1": self.x1,
                "y0": self.y0, "y1": self.y1}


Region = AnnulusSpec | Window


@dataclass(frozen=True)
class GridPlan:
    """Deterministic cell-center sampling; cells are equal-measure.

    On an annulus the axes are (n1 = angular, n2 = radial) with equal-area
    radial bins; on a window they are (n1 = x, n2 = y) pixel centers.
    """

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("grid plan needs positive dimensions")

    @property
    def total(self) -> int:
        return self.n1 * self.n2

    def plan_dict(self) -> dict:
        return {"kind": "grid", "n1": self.n1, "n2": self.n2}


@dataclass(frozen=True)
class MonteCarloPlan:
    """Area-uniform seeded sampling with a normal-approximation interval."""

    n: int
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("sample count must be positive")

    @property
    def total(self) -> int:
        return self.n

    def plan_dict(self) -> dict:
        return {"kind": "monte-carlo", "n": self.n, "seed": self.seed}


SamplePlan = GridPlan | MonteCarloPlan


def _philox_uniforms(seed: int, n: int, dims: int) -> np.ndarray:
    """dims x n uniforms; entry (d, i) is a pure function of (seed, d, i)."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random((dims, n))


def sample_points(region: Region, plan: SamplePlan) -> np.ndarray:
    """Deterministic sample locations for the plan, area-uniform in measure.

    Monte Carlo on the annulus inverts the radial area CDF:
    s = r * sqrt(1/4 + 15/4 * u) maps u ~ U[0,1) to |z| with uniform area.
    """
    if isinstance(region, AnnulusSpec):
        r = region.r
        if isinstance(plan, GridPlan):
            i = np.arange(plan.n1)
            j = np.arange(plan.n2)
            thetas = (i + 0.5) * (_TWO_PI / plan.n1)
            s = r * np.sqrt(0.25 + 3.75 * (j + 0.5) / plan.n2)
            ss, tt = np.meshgrid(s, thetas, indexing="ij")
            return (ss * np.exp(1j * tt)).ravel()
        u, v = _philox_uniforms(plan.seed, plan.n, 2)
        s = r * np.sqrt(0.25 + 3.75 * u)
        return s * np.exp(1j * _TWO_PI * v)
    if isinstance(plan, GridPlan):
        x = region.x0 + (np.arange(plan.n1) + 0.5) * (region.x1 - region.x0) / plan.n1
        y = region.y0 + (np.arange(plan.n2) + 0.5) * (region.y1 - region.y0) / plan.n2
        yy, xx = np.meshgrid(y, x, indexing="ij")
        return (xx + 1j * yy).ravel()
    u, v = _philox_uniforms(plan.seed, plan.n, 2)
    return (region.x0 + u * (region.x1 - region.x0)
            + 1j * (region.y0 + v * (region.y1 - region.y0)))


@dataclass(frozen=True)
class DensityReport:
    """dens(X, region) estimate with its sampling provenance."""

    region: dict
    plan: dict
    hits: int
    total: int
    density: float
    confidence_halfwidth: float
    excluded_fraction: float | None = None
    fast_escaping_beta: bool | None = None

    def to_json_dict(self) -> dict:
        out = {
            "format_version": 1,
            "region": self.region,
            "plan": self.plan,
            "hits": self.hits,
            "total": self.total,
            "density": self.density,
            "confidence_halfwidth": self.confidence_halfwidth,
        }
        if self.excluded_fraction is not None:
            out["excluded_fraction"] = self.excluded_fraction
        if self.fast_escaping_beta is not None:
            out["fast_escaping_beta"] = self.fast_escaping_beta
        return out


def _make_report(region: Region, plan: SamplePlan, hits: int,
                 total: int) -> DensityReport:
    density = hits / total
    if isinstance(plan, MonteCarloPlan):
        half = 1.96 * math.sqrt(max(density * (1.0 - density), 0.0) / total)
    else:
        half = 0.0
    return DensityReport(region.region_dict(), plan.plan_dict(),
                         int(hits), int(total), density, half)


@dataclass(frozen=True)
class MembershipVerdict:
    """Escape-criteria verdict at one point.

    ``min_disk_re`` and ``disk_radius`` are populated by the B test; the disk
    positivity is a sampling certificate over ``disk_samples`` points on each
    of 8 concentric circles plus the center.
    """

    z: complex
    in_A: bool
    re_zl: float
    log_f_margin: float              # log|f(z)| - log beta(|z|)
    in_B: bool | None = None
    min_disk_re: float | None = None
    disk_radius: float | None = None
    disk_samples: int | None = None
    certificate: str = "pointwise"


def membership_A(model: FunctionModel, beta: GrowthMinorant,
                 z: complex, a_threshold: float = A_THRESHOLD) -> MembershipVerdict:
    """Strict log-space test: Re(z L(z)) > 64 and log|f(z)| > log beta(|z|)."""
    mask, re_zl, margin = _membership_A_batch(
        model, beta, np.array([z], dtype=np.complex128), a_threshold)
    return MembershipVerdict(z=complex(z), in_A=bool(mask[0]),
                             re_zl=float(re_zl[0]), log_f_margin=float(margin[0]))


def _membership_A_batch(model: FunctionModel, beta: GrowthMinorant,
                        zs: np.ndarray, a_threshold: float = A_THRESHOLD
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    log_abs, _, ok = model.log_eval_many(zs)
    lvals, l_ok = model.log_derivative_many(zs)
    re_zl = np.where(l_ok, (zs * lvals).real, -np.inf)
    log_beta = beta.log_beta_many(np.abs(zs))
    margin = np.where(ok, log_abs - log_beta, -np.inf)
    mask = ok & l_ok & (re_zl > a_threshold) & (margin > 0.0)
    return mask, re_zl, margin


def _disk_sample_offsets(disk_samples: int) -> np.ndarray:
    """Unit-disk sample pattern: center plus 8 circles at radii j/8."""
    offs = [0.0 + 0.0j]
    for ring in range(1, 9):
        rho = ring / 8.0
        ang = np.arange(disk_samples) * (_TWO_PI / disk_samples)
        offs.extend(rho * np.exp(1j * ang))
    return np.asarray(offs, dtype=np.complex128)


def membership_B(model: FunctionModel, beta: GrowthMinorant, z: complex,
                 disk_samples: int = 16,
                 a_threshold: float = A_THRESHOLD,
                 b_radius_factor: float = B_RADIUS_FACTOR) -> MembershipVerdict:
    """A-membership plus sampled positivity of Re(zeta L(zeta)) on the disk.

    The disk radius is 32 |f(z)/f'(z)| = 32/|L(z)|. A near-zero of f at any
    sample point refutes positivity and yields in_B = False.
    """
    base = membership_A(model, beta, z, a_threshold)
    if not base.in_A or not math.isfinite(base.re_zl):
        return MembershipVerdict(z=base.z, in_A=base.in_A, re_zl=base.re_zl,
                                 log_f_margin=base.log_f_margin, in_B=False,
                                 certificate="sampling")
    mask, min_re, radius = _membership_B_batch(
        model, beta, np.array([z], dtype=np.complex128), disk_samples,
        a_threshold, b_radius_factor)
    return MembershipVerdict(
        z=base.z, in_A=base.in_A, re_zl=base.re_zl,
        log_f_margin=base.log_f_margin, in_B=bool(mask[0]),
        min_disk_re=float(min_re[0]), disk_radius=float(radius[0]),
        disk_samples=disk_samples, certificate="sampling")


def _membership_B_batch(model: FunctionModel, beta: GrowthMinorant,
                        zs: np.ndarray, disk_samples: int = 16,
                        a_threshold: float = A_THRESHOLD,
                        b_radius_factor: float = B_RADIUS_FACTOR
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # only A-members need the disk certificate; for them Re(zL) > 64 forces
    # the disk radius 32/|L| below |z|/2, keeping samples near the annulus
    in_a, _, _ = _membership_A_batch(model, beta, zs, a_threshold)
    lvals, l_ok = model.log_derivative_many(zs)
    with np.errstate(divide="ignore"):
        radius = np.where(l_ok & (np.abs(lvals) > 0),
                          b_radius_factor / np.abs(lvals), np.inf)
    min_re = np.full(zs.shape, -np.inf)
    idx = np.flatnonzero(in_a & l_ok)
    if idx.size:
        offsets = _disk_sample_offsets(disk_samples)
        pts = zs[idx, None] + radius[idx, None] * offsets[None, :]
        flat = pts.ravel()
        l_all, ok_all = model.log_derivative_many(flat)
        re_all = np.where(ok_all, (flat * l_all).real, -np.inf)
        min_re[idx] = re_all.reshape(pts.shape).min(axis=1)
    mask = in_a & l_ok & (min_re > 0.0)
    return mask, min_re, radius


def predicate_A(model: FunctionModel, beta: GrowthMinorant,
                a_threshold: float = A_THRESHOLD) -> Callable[[np.ndarray], np.ndarray]:
    """Batch predicate form of membership_A for density estimation."""
    def pred(zs: np.ndarray) -> np.ndarray:
        mask, _, _ = _membership_A_batch(model, beta, zs, a_threshold)
        return mask
    return pred


def predicate_B(model: FunctionModel, beta: GrowthMinorant,
                disk_samples: int = 16,
                a_threshold: float = A_THRESHOLD,
                b_radius_factor: float = B_RADIUS_FACTOR) -> Callable[[np.ndarray], np.ndarray]:
    """Batch predicate form of membership_B (sampling certificate)."""
    def pred(zs: np.ndarray) -> np.ndarray:
        mask, _, _ = _membership_B_batch(model, beta, zs, disk_samples,
                                         a_threshold, b_radius_factor)
        return mask
    return pred


def annulus_density(predicate: Callable[[np.ndarray], np.ndarray],
                    region: Region, plan: SamplePlan) -> DensityReport:
    """Density of predicate-true samples under the deterministic plan.

    ``predicate`` receives a complex array and returns a boolean mask; the
    worker parallelism level never changes which samples are drawn.
    """
    zs = sample_points(region, plan)
    mask = map_chunked(predicate, zs)
    return _make_report(region, plan, int(mask.sum()), zs.size)


def density_with_exclusions(predicate: Callable[[np.ndarray], np.ndarray],
                            region: Region, disks, plan: SamplePlan) -> DensityReport:
    """Density of (predicate and outside every disk); records the sampled
    area fraction of the excluded union for budget comparisons."""
    zs = sample_points(region, plan)
    outside = disks.mask_outside(zs)
    mask = map_chunked(predicate, zs) & outside
    report = _make_report(region, plan, int(mask.sum()), zs.size)
    excluded = 1.0 - float(outside.sum()) / zs.size
    return DensityReport(report.region, report.plan, report.hits, report.total,
                         report.density, report.confidence_halfwidth,
                         excluded_fraction=excluded)


@dataclass(frozen=True)
class MarginRow:
    r: float
    density: float
    alpha: float
    margin: float
    flagged: bool


def hypothesis_check_14b(model: FunctionModel, beta: GrowthMinorant,
                         alpha: DensityBudget, r_list: Sequence[float],
                         plan: SamplePlan, disk_samples: int = 16,
                         a_threshold: float = A_THRESHOLD,
                         b_radius_factor: float = B_RADIUS_FACTOR) -> list[MarginRow]:
    """margin(r) = dens(B, ann(r)) - (1 - alpha(r)); negative margins flagged."""
    rs = [float(r) for r in r_list]
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("r_list must be increasing")
    pred = predicate_B(model, beta, disk_samples, a_threshold, b_radius_factor)
    rows = []
    for r in rs:
        rep = annulus_density(pred, AnnulusSpec(r), plan)
        a_r = alpha.alpha_of_r(r)
        margin = rep.density - (1.0 - a_r)
        rows.append(MarginRow(r, rep.density, a_r, margin, margin < 0.0))
    return rows
