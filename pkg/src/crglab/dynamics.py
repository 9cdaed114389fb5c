"""Orbit iteration and escape classification with a survival-track certificate.

A start point is classified Escaped(k) only when its orbit crosses the
bailout threshold at step k while the whole observed track satisfied
log|z_j| > log beta^j(r0) for every j <= k. That track condition is the
finite-horizon version of the nested survival sets T_n; the verdict is a
certificate about the observed horizon, never a proof of escape.

Iteration runs in plain complex arithmetic while representable; the final
comparison after a floating overflow is redone in log space from the last
representable iterate, so escape steps are decided on true log-moduli.
Indeterminate is a first-class verdict: it marks orbits whose comparison
could not be completed (overflow to NaN, beta-track beyond float range, or a
bailout crossing with a broken track that cannot be iterated further).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .criteria import (
    AnnulusSpec,
    DensityReport,
    GridPlan,
    MonteCarloPlan,
    Region,
    SamplePlan,
    Window,
    _make_report,
    sample_points,
)
from .growth import GrowthMinorant, beta_log_track
from .models import CanonicalProduct, FunctionModel
from .parallel import map_chunked

# verdict codes used by the batch classifier and the raster
SURVIVED = 0
ESCAPED = 1
ZERO_HIT = 2
INDETERMINATE = 3

DEFAULT_BAILOUT_LOG = 500.0


def _check_iteration_domain(model: FunctionModel, bailout_log: float) -> None:
    """Orbits run up to |z| = exp(bailout_log); a truncated product must be
    certified at least that far out."""
    if isinstance(model, CanonicalProduct) and bailout_log > math.log(model.r_max):
        raise ValueError(
            f"bailout_log = {bailout_log:g} exceeds the product's certified "
            f"radius (log r_max = {math.log(model.r_max):.3g}); rebuild the "
            "product with a larger r_max or lower the bailout")


@dataclass(frozen=True)
class OrbitRecord:
    """Full classification record for a single start point."""

    start: complex
    log_moduli: tuple[float, ...]
    verdict: str                      # "escaped" | "survived" | "zero-hit" | "indeterminate"
    step: int | None
    beta_track: tuple[float, ...]
    fast_escaping_beta: bool


@dataclass(frozen=True)
class EscapeMap:
    """Raster of verdict codes: 0 survived, 1..254 escape step (clamped),
    255 indeterminate or zero-hit. Row-major, top row = max imaginary part."""

    window: Window
    width: int
    height: int
    codes: np.ndarray        # uint8, shape (height, width)
    steps: np.ndarray        # int32 escape step, -1 where not escaped

    def escaped_fraction(self) -> float:
        esc = (self.codes >= 1) & (self.codes <= 254)
        return float(esc.sum()) / self.codes.size

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.codes.astype(np.uint8).tobytes()


def _classify_batch(model: FunctionModel, z0s: np.ndarray, track: np.ndarray,
                    max_iter: int, bailout_log: float,
                    recorder: list | None = None
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised classifier; returns (verdict codes, step of decision).

    ``track`` holds log beta^j(r0) for j = 0..max_iter (+inf sentinel allowed).
    When plain evaluation of the next iterate overflows, the step is redone
    through log-space evaluation: either the iterate is reconstructed as
    exp(log f), or its log-modulus is known to exceed 709 > bailout_log and
    the point is decided on the next comparison. When ``recorder`` is a
    list, per-step log-moduli are appended to it (scalar OrbitRecord path).
    """
    z = np.array(z0s, dtype=np.complex128).ravel()
    n = z.size
    codes = np.full(n, SURVIVED, dtype=np.uint8)
    steps = np.full(n, -1, dtype=np.int32)
    active = np.ones(n, dtype=bool)
    track_ok = np.ones(n, dtype=bool)
    zero_hit = np.zeros(n, dtype=bool)
    with np.errstate(divide="ignore"):
        lm = np.log(np.abs(z))

    for k in range(max_iter + 1):
        if recorder is not None:
            recorder.append(lm.copy())
        if not active.any():
            break
        bad = active & np.isnan(lm)
        codes[bad], steps[bad] = INDETERMINATE, k
        active &= ~bad

        hit = active & zero_hit
        codes[hit], steps[hit] = ZERO_HIT, k
        active &= ~hit

        # survival-track comparison; lm > +inf sentinel is False, so a point
        # whose track left the float range can never be escape-certified
        track_ok &= ~active | (lm > track[k])

        crossed = active & (lm >= bailout_log)
        esc = crossed & track_ok
        codes[esc], steps[esc] = ESCAPED, k
        ind = crossed & ~track_ok
        codes[ind], steps[ind] = INDETERMINATE, k
        active &= ~crossed

        if k == max_iter or not active.any():
            break

        idx = np.flatnonzero(active)
        znext = model.plain_values(z[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            lm_next = np.log(np.abs(znext))
        bad_local = ~np.isfinite(np.abs(znext))
        if bad_local.any():
            src = z[idx][bad_local]
            la, ph, ok = model.log_eval_many(src)
            rebuilt = np.where(ok & (la < 709.0),
                               np.exp(np.minimum(la, 709.0)) * np.exp(1j * ph),
                               np.inf + 0.0j)
            rebuilt = np.where(ok, rebuilt, 0.0 + 0.0j)
            znext[bad_local] = rebuilt
            lm_next[bad_local] = np.where(ok, la, -np.inf)
            zero_hit[idx[bad_local]] = ~ok
        z[idx] = znext
        lm[idx] = lm_next

    return codes, steps


def classify_orbit(model: FunctionModel, z0: complex, r0: float,
                   beta: GrowthMinorant, max_iter: int = 50,
                   bailout_log: float = DEFAULT_BAILOUT_LOG) -> OrbitRecord:
    """Classify one start point, keeping the full log-modulus track.

    Escaped(k) iff log|z_k| >= bailout_log and log|z_j| > log beta^j(r0) for
    all j <= k; Survived if max_iter is reached below bailout.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if bailout_log > 700.0:
        raise ValueError("bailout_log must stay exp-representable (<= 700)")
    _check_iteration_domain(model, bailout_log)
    track = np.array(beta_log_track(beta, r0, max_iter))
    recorder: list[np.ndarray] = []
    codes, steps = _classify_batch(model, np.array([z0]), track, max_iter,
                                   bailout_log, recorder)
    code, step = int(codes[0]), int(steps[0])
    log_moduli = [float(r[0]) for r in recorder]
    if code != SURVIVED:
        log_moduli = log_moduli[:step + 1]
    verdict = {SURVIVED: "survived", ESCAPED: "escaped",
               ZERO_HIT: "zero-hit", INDETERMINATE: "indeterminate"}[code]
    return OrbitRecord(
        start=complex(z0), log_moduli=tuple(log_moduli), verdict=verdict,
        step=step if code != SURVIVED else None,
        beta_track=tuple(float(t) for t in track),
        fast_escaping_beta=beta.fast_escaping_form)


def escape_map(model: FunctionModel, window: Window, width: int, height: int,
               r0: float, beta: GrowthMinorant, max_iter: int = 50,
               bailout_log: float = DEFAULT_BAILOUT_LOG) -> EscapeMap:
    """Classify every pixel center of the window; deterministic raster."""
    if width < 1 or height < 1:
        raise ValueError("raster dimensions must be positive")
    _check_iteration_domain(model, bailout_log)
    track = np.array(beta_log_track(beta, r0, max_iter))
    xs = window.x0 + (np.arange(width) + 0.5) * (window.x1 - window.x0) / width
    ys = window.y1 - (np.arange(height) + 0.5) * (window.y1 - window.y0) / height
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    starts = (xx + 1j * yy).ravel()

    def work(chunk: np.ndarray) -> np.ndarray:
        codes, steps = _classify_batch(model, chunk, track, max_iter, bailout_log)
        return np.stack([codes.astype(np.int32), steps], axis=1)

    packed = map_chunked(work, starts)
    codes, steps = packed[:, 0], packed[:, 1]
    pix = np.zeros(codes.shape, dtype=np.uint8)
    esc = codes == ESCAPED
    pix[esc] = np.clip(steps[esc], 1, 254).astype(np.uint8)
    pix[(codes == INDETERMINATE) | (codes == ZERO_HIT)] = 255
    return EscapeMap(window=window, width=width, height=height,
                     codes=pix.reshape(height, width),
                     steps=np.where(esc, steps, -1).reshape(height, width).astype(np.int32))


def measure_estimate(model: FunctionModel, region: Region, plan: SamplePlan,
                     beta: GrowthMinorant, r0: float | None = None,
                     max_iter: int = 50,
                     bailout_log: float = DEFAULT_BAILOUT_LOG) -> DensityReport:
    """Density of Escaped verdicts over the region: a lower-bound estimator
    for dens(I(f), region) up to classification error.

    For an annulus, r0 defaults to r/2 so the |z| > r0 gate is implied by
    the region itself.
    """
    if r0 is None:
        if isinstance(region, AnnulusSpec):
            r0 = region.r / 2.0
        else:
            raise ValueError("r0 is required for window regions")
    _check_iteration_domain(model, bailout_log)
    track = np.array(beta_log_track(beta, r0, max_iter))
    zs = sample_points(region, plan)

    def work(chunk: np.ndarray) -> np.ndarray:
        codes, _ = _classify_batch(model, chunk, track, max_iter, bailout_log)
        return codes == ESCAPED

    mask = map_chunked(work, zs)
    base = _make_report(region, plan, int(mask.sum()), zs.size)
    return DensityReport(base.region, base.plan, base.hits, base.total,
                         base.density, base.confidence_halfwidth,
                         fast_escaping_beta=beta.fast_escaping_form)
