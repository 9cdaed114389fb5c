"""Constructive covering lemmas with audited certificates.

Three constructions are provided:

* Besicovitch cover: greedy selection by descending radius, admitting a disk
  only if its center is not already covered. Coverage holds by construction;
  bounded multiplicity (<= 256 in the plane) is audited at probe points.

* Fuchs-Macintyre disks: greedy mass concentration with the square-root
  radius schedule rho(lam) = H*sqrt(lam/n) and final inflation by 2. This
  gives sum t_k^2 <= 4 H^2 exactly and, outside the disks, the j-th nearest
  input point at distance >= H*sqrt(j/n), hence
  sum_k 1/|z - z_k| <= 2n/H.

* Cartan/Levin minimum-modulus disks: the same greedy with the linear
  schedule rho(lam) = lam*H/n (H = 2*eta*R) and inflation by 2, giving
  sum s_k <= 4*eta*R and the classical product lower bound, audited against
  log|g(z)| > -(2 + log(3e/2 eta)) log M(2eR, g) on a probe grid.

Because constant conventions differ across the literature, the audits are
part of each operation's postcondition: a failed audit raises
CertificateFailure (a construction bug, not an input error). Probe sets are
deterministic low-discrepancy (Halton) points, so certificates reproduce
bit-for-bit. Budget inequalities are verified in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CertificateFailure

_TWO_PI = 2.0 * math.pi

BESICOVITCH_MAX_MULTIPLICITY = 256   # 4**(2n) with n = 2


@dataclass(frozen=True)
class DiskSet:
    """Finite collection of closed disks (center, radius)."""

    disks: tuple[tuple[complex, float], ...]

    def __post_init__(self) -> None:
        if any(r <= 0 for _, r in self.disks):
            raise ValueError("disk radii must be positive")

    def __len__(self) -> int:
        return len(self.disks)

    def centers(self) -> np.ndarray:
        return np.array([c for c, _ in self.disks], dtype=np.complex128)

    def radii(self) -> np.ndarray:
        return np.array([r for _, r in self.disks], dtype=float)

    def sum_radii(self, within: float | None = None) -> float:
        return float(sum(r for c, r in self.disks
                         if within is None or abs(c) <= within))

    def sum_sq_radii(self, within: float | None = None) -> float:
        return float(sum(r * r for c, r in self.disks
                         if within is None or abs(c) <= within))

    def mask_outside(self, zs: np.ndarray) -> np.ndarray:
        """Boolean mask of points lying outside every (closed) disk."""
        zs = np.asarray(zs, dtype=np.complex128)
        out = np.ones(zs.shape, dtype=bool)
        for c, r in self.disks:
            out &= np.abs(zs - c) > r
        return out

    def multiplicity(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=np.complex128)
        count = np.zeros(zs.shape, dtype=np.int64)
        for c, r in self.disks:
            count += np.abs(zs - c) <= r
        return count

    def to_text(self) -> str:
        """One disk per line: re im radius, 17 significant digits, LF."""
        lines = [f"{c.real:.17g} {c.imag:.17g} {r:.17g}" for c, r in self.disks]
        return "".join(line + "\n" for line in lines)

    @staticmethod
    def from_text(text: str) -> "DiskSet":
        disks = []
        for i, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"disk line {i + 1}: expected 're im radius'")
            re, im, r = (float(p) for p in parts)
            disks.append((complex(re, im), r))
        return DiskSet(tuple(disks))


def inflate(disks: DiskSet, q_r: float) -> DiskSet:
    """Add q_r to every radius; centers and count are preserved."""
    if q_r < 0:
        raise ValueError("inflation must be nonnegative")
    return DiskSet(tuple((c, r + q_r) for c, r in disks.disks))


def inflation_area_identity(disks: DiskSet, q_r: float) -> bool:
    """Exact check of sum (t+q)^2 <= 2*sum t^2 + 2*m*q^2 in rationals."""
    q = Fraction(q_r)
    lhs = sum((Fraction(r) + q) ** 2 for _, r in disks.disks)
    rhs = 2 * sum(Fraction(r) ** 2 for _, r in disks.disks) + 2 * len(disks) * q * q
    return lhs <= rhs


def budget_checks(disks: DiskSet, r: float) -> tuple[float, float]:
    """(sum of radii over |center|<=r) / r and (sum of radii^2 over same) / r^2."""
    if r <= 0:
        raise ValueError("r must be positive")
    return disks.sum_radii(within=r) / r, disks.sum_sq_radii(within=r) / r ** 2


# ---------------------------------------------------------------------------
# Koebe distortion constants

@dataclass(frozen=True)
class KoebeConstants:
    """Named distortion bounds of a univalent map at relative radius rho."""

    rho: float
    growth_lower: float       # rho/(1+rho)^2
    growth_upper: float       # rho/(1-rho)^2
    deriv_lower: float        # (1-rho)/(1+rho)^3
    deriv_upper: float        # (1+rho)/(1-rho)^3
    ratio: float              # (1+rho)/(1-rho)
    ratio_squared: float
    ratio_fourth: float
    ratio_sixth: float
    quarter: float = 0.25     # image disk radius factor r|f'(a)|/4


def koebe_constants(rho: float) -> KoebeConstants:
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie strictly between 0 and 1")
    ratio = (1.0 + rho) / (1.0 - rho)
    return KoebeConstants(
        rho=rho,
        growth_lower=rho / (1.0 + rho) ** 2,
        growth_upper=rho / (1.0 - rho) ** 2,
        deriv_lower=(1.0 - rho) / (1.0 + rho) ** 3,
        deriv_upper=(1.0 + rho) / (1.0 - rho) ** 3,
        ratio=ratio,
        ratio_squared=ratio ** 2,
        ratio_fourth=ratio ** 4,
        ratio_sixth=ratio ** 6)


# ---------------------------------------------------------------------------
# Halton probes

def _halton(n: int, base: int) -> np.ndarray:
    out = np.zeros(n)
    for i in range(n):
        f, x, k = 1.0, 0.0, i + 1
        while k > 0:
            f /= base
            x += f * (k % base)
            k //= base
        out[i] = x
    return out


def halton_points(n: int, x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
    """Deterministic low-discrepancy complex points in a rectangle."""
    return (x0 + (x1 - x0) * _halton(n, 2)) + 1j * (y0 + (y1 - y0) * _halton(n, 3))


# ---------------------------------------------------------------------------
# Besicovitch cover

def besicovitch_cover(points: Sequence[complex],
                      radius_fn: Callable[[complex], float]) -> DiskSet:
    """Greedy sub-collection covering every input point.

    Disks are visited by descending radius; one is selected iff its center is
    not contained in any previously selected disk. Every unselected center is
    then covered by a selected disk, so the input set is covered.
    """
    pts = [complex(p) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    radii = [float(radius_fn(p)) for p in pts]
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    order = sorted(range(len(pts)), key=lambda i: (-radii[i], i))
    sel_c: list[complex] = []
    sel_r: list[float] = []
    for i in order:
        p = pts[i]
        covered = any(abs(p - c) <= r for c, r in zip(sel_c, sel_r))
        if not covered:
            sel_c.append(p)
            sel_r.append(radii[i])
    return DiskSet(tuple(zip(sel_c, sel_r)))


@dataclass(frozen=True)
class BesicovitchCertificate:
    covers_all: bool
    max_multiplicity: int
    n_probes: int
    n_selected: int


def besicovitch_audit(points: Sequence[complex], disks: DiskSet,
                      n_probes: int = 10_000, seed: int = 0) -> BesicovitchCertificate:
    """Audit full cover at the inputs and multiplicity <= 256 at random probes."""
    pts = np.asarray([complex(p) for p in points], dtype=np.complex128)
    covers = bool((~disks.mask_outside(pts)).all())
    cs, rs = disks.centers(), disks.radii()
    lo_x, hi_x = (cs.real - rs).min(), (cs.real + rs).max()
    lo_y, hi_y = (cs.imag - rs).min(), (cs.imag + rs).max()
    gen = np.random.Generator(np.random.Philox(key=seed))
    probes = (lo_x + (hi_x - lo_x) * gen.random(n_probes)
              + 1j * (lo_y + (hi_y - lo_y) * gen.random(n_probes)))
    probes = np.concatenate([probes, pts])
    mult = int(disks.multiplicity(probes).max())
    cert = BesicovitchCertificate(covers, mult, int(probes.size), len(disks))
    if not covers or mult > BESICOVITCH_MAX_MULTIPLICITY:
        raise CertificateFailure(f"besicovitch audit failed: {cert}")
    return cert


# ---------------------------------------------------------------------------
# greedy mass concentration shared by Fuchs-Macintyre and Cartan

def _densest_disk(pts: np.ndarray, rho: float) -> tuple[int, complex]:
    """(max count, center) over disks of radius rho covering input points.

    An optimal disk may be assumed to pass through two points, or to be
    centered at a point; both candidate families are enumerated exactly.
    """
    n = len(pts)
    tol = 1e-9 * max(rho, 1.0)
    cand_list = [pts]
    dist = np.abs(pts[:, None] - pts[None, :])
    iu, ju = np.triu_indices(n, k=1)
    close = dist[iu, ju] <= 2.0 * rho + tol
    if close.any():
        pi, pj = pts[iu[close]], pts[ju[close]]
        mid = (pi + pj) / 2.0
        d = np.abs(pj - pi)
        h = np.sqrt(np.maximum(rho * rho - (d / 2.0) ** 2, 0.0))
        perp = np.where(d > 0, 1j * (pj - pi) / np.where(d > 0, d, 1.0), 0.0)
        cand_list.extend([mid + h * perp, mid - h * perp])
    cand = np.concatenate(cand_list)
    counts = (np.abs(pts[None, :] - cand[:, None]) <= rho + tol).sum(axis=1)
    k = int(np.argmax(counts))
    return int(counts[k]), complex(cand[k])


def _greedy_concentration(points: np.ndarray,
                          schedule: Callable[[int], float]
                          ) -> list[tuple[complex, int]]:
    """Capture points by maximal-level disks; returns (center, captured) pairs.

    At each step the largest lam is found such that a disk of radius
    schedule(lam) contains >= lam surviving points; that disk's points are
    removed. Probing jumps lam down to the observed count, which skips only
    levels already known infeasible, so selected levels are exactly maximal.
    The captured count n_i >= lam_i, and radii derived from n_i keep every
    budget of the form sum g(n_i/n) <= g-total because sum n_i = n.
    """
    remaining = points.copy()
    lam_cap = len(points)
    captured: list[tuple[complex, int]] = []
    while len(remaining):
        lam = min(lam_cap, len(remaining))
        while True:
            count, center = _densest_disk(remaining, schedule(lam))
            if count >= lam:
                break
            lam = min(count, lam - 1)
            if lam < 1:
                raise AssertionError("level-1 disk must always exist")
        lam_cap = lam
        if lam == 1:
            # no schedule(2)-disk holds two points, so singletons are maximal
            captured.extend((complex(p), 1) for p in remaining)
            break
        rho = schedule(lam)
        keep = np.abs(remaining - center) > rho + 1e-9 * max(rho, 1.0)
        inside = int((~keep).sum())
        if inside < lam:
            raise AssertionError("selected disk lost its points")
        captured.append((center, inside))
        remaining = remaining[keep]
    return captured


def _shrink_until(radii: list[float], budget_holds: Callable[[list[float]], bool]
                  ) -> list[float]:
    """Nudge radii down by 1 ulp-scale steps until the exact budget holds."""
    rs = list(radii)
    for _ in range(4):
        if budget_holds(rs):
            return rs
        rs = [r * (1.0 - 4e-16) for r in rs]
    if not budget_holds(rs):
        raise CertificateFailure("budget cannot be satisfied by rounding nudges")
    return rs


@dataclass(frozen=True)
class FuchsCertificate:
    n_points: int
    n_disks: int
    H: float
    sum_sq_radii: float
    budget: float               # 4 H^2
    harmonic_bound: float       # 2 n / H
    max_harmonic_sum: float     # worst probe value of sum 1/|z - z_k|
    n_probes: int


def fuchs_macintyre_disks(points: Sequence[complex], H: float,
                          n_probes: int = 10_000
                          ) -> tuple[DiskSet, FuchsCertificate]:
    """Exceptional disks with sum t_k^2 <= 4H^2 and the harmonic-sum bound.

    Construction: greedy concentration with radius schedule H*sqrt(lam/n),
    each selected disk inflated by the factor 2. The certificate checks the
    square budget exactly (rational arithmetic) and the bound
    sum_k 1/|z - z_k| <= 2n/H at Halton probes outside the disks, the sum
    running over all n input points.
    """
    pts = np.asarray([complex(p) for p in points], dtype=np.complex128)
    n = len(pts)
    if n == 0:
        raise ValueError("need at least one point")
    if H <= 0:
        raise ValueError("H must be positive")
    captured = _greedy_concentration(pts, lambda lam: H * math.sqrt(lam / n))
    radii = [2.0 * H * math.sqrt(lam / n) for _, lam in captured]
    budget = 4 * Fraction(H) ** 2

    def holds(rs: list[float]) -> bool:
        return sum(Fraction(r) ** 2 for r in rs) <= budget

    radii = _shrink_until(radii, holds)
    disks = DiskSet(tuple((c, r) for (c, _), r in zip(captured, radii)))

    bound = 2.0 * n / H
    cs, rs_arr = disks.centers(), disks.radii()
    pad = 2.0 * H + float(rs_arr.max())
    lo_x = min(pts.real.min(), (cs.real - rs_arr).min()) - pad
    hi_x = max(pts.real.max(), (cs.real + rs_arr).max()) + pad
    lo_y = min(pts.imag.min(), (cs.imag - rs_arr).min()) - pad
    hi_y = max(pts.imag.max(), (cs.imag + rs_arr).max()) + pad
    probes = halton_points(4 * n_probes, lo_x, hi_x, lo_y, hi_y)
    probes = probes[disks.mask_outside(probes)][:n_probes]
    hsum = np.zeros(probes.shape)
    for p in pts:
        hsum += 1.0 / np.abs(probes - p)
    worst = float(hsum.max()) if probes.size else 0.0
    cert = FuchsCertificate(n, len(disks), H, disks.sum_sq_radii(),
                            float(budget), bound, worst, int(probes.size))
    if worst > bound * (1.0 + 1e-12):
        raise CertificateFailure(f"fuchs-macintyre harmonic audit failed: {cert}")
    if not holds(list(disks.radii())):
        raise CertificateFailure(f"fuchs-macintyre area budget failed: {cert}")
    return disks, cert


@dataclass(frozen=True)
class CartanCertificate:
    n_zeros: int
    n_disks: int              # reported disk count, not constrained
    eta: float
    R: float
    sum_radii: float
    budget: float             # 4 eta R
    log_m_2eR: float
    bound_rhs: float          # -(2 + log(3e/2eta)) * log M(2eR, g)
    min_log_g: float          # worst probe value of log|g|
    n_probes: int


def _poly_log_abs(zeros: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """log|prod (1 - z/z_k)| evaluated stably as a sum of logs."""
    out = np.zeros(zs.shape)
    with np.errstate(divide="ignore"):
        for zk in zeros:
            out += np.log(np.abs(1.0 - zs / zk))
    return out


def cartan_levin_disks(zeros: Sequence[complex], R: float, eta: float,
                       n_probes: int = 10_000
                       ) -> tuple[DiskSet, CartanCertificate]:
    """Minimum-modulus exceptional disks for g(z) = prod (1 - z/z_k).

    Boutroux-Cartan greedy on the zero multiset with the linear schedule
    lam*H/n (H = 2*eta*R) and inflation by 2, so sum s_k <= 4*eta*R exactly.
    The certificate audits log|g(z)| > -(2 + log(3e/2eta)) * log M(2eR, g) on
    a Halton probe set in D(0, R) outside the disks, with M(2eR, g) computed
    from the factorization. An empty zero list yields an empty disk set.
    """
    zks = np.asarray([complex(z) for z in zeros], dtype=np.complex128)
    if (zks == 0).any():
        raise ValueError("zeros must be nonzero so that g(0) = 1")
    if R <= 0:
        raise ValueError("R must be positive")
    if not (0.0 < eta < 1.5 * math.e):
        raise ValueError("eta must lie in (0, 3e/2)")
    n = len(zks)
    two_e_r = 2.0 * math.e * R
    thetas = np.arange(2048) * (_TWO_PI / 2048)
    ring = two_e_r * np.exp(1j * thetas)
    log_m = float(_poly_log_abs(zks, ring).max()) if n else 0.0
    rhs = -(2.0 + math.log(1.5 * math.e / eta)) * log_m

    if n == 0:
        cert = CartanCertificate(0, 0, eta, R, 0.0, 4.0 * eta * R, log_m,
                                 rhs, 0.0, 0)
        return DiskSet(()), cert

    H = 2.0 * eta * R
    captured = _greedy_concentration(zks, lambda lam: lam * H / n)
    radii = [2.0 * lam * H / n for _, lam in captured]
    budget = 4 * Fraction(eta) * Fraction(R)

    def holds(rs: list[float]) -> bool:
        return sum(Fraction(r) for r in rs) <= budget

    radii = _shrink_until(radii, holds)
    disks = DiskSet(tuple((c, r) for (c, _), r in zip(captured, radii)))

    probes = halton_points(4 * n_probes, -R, R, -R, R)
    probes = probes[np.abs(probes) <= R]
    probes = probes[disks.mask_outside(probes)][:n_probes]
    vals = _poly_log_abs(zks, probes)
    worst = float(vals.min()) if probes.size else math.inf
    cert = CartanCertificate(n, len(disks), eta, R, disks.sum_radii(),
                             float(budget), log_m, rhs, worst, int(probes.size))
    if probes.size and worst <= rhs:
        raise CertificateFailure(f"cartan-levin minimum-modulus audit failed: {cert}")
    if not holds(list(disks.radii())):
        raise CertificateFailure(f"cartan-levin radius budget failed: {cert}")
    return disks, cert
