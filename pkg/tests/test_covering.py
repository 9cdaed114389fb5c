import math
from fractions import Fraction

import numpy as np
import pytest

from crglab import covering
from crglab.errors import CertificateFailure


class TestDiskSet:
    def test_budget_accessors(self):
        ds = covering.DiskSet(((0j, 1.0),))
        assert covering.budget_checks(ds, 10.0) == (0.1, 0.01)
        assert covering.budget_checks(covering.DiskSet(()), 10.0) == (0.0, 0.0)

    def test_harmonic_radii(self):
        ds = covering.DiskSet(tuple((complex(k), 1.0 / k) for k in range(1, 201)))
        c0, _ = covering.budget_checks(ds, 100.0)
        assert c0 == pytest.approx(sum(1.0 / k for k in range(1, 101)) / 100.0)

    def test_text_round_trip(self):
        ds = covering.DiskSet(((1.234567890123456 + 2j, 0.375),
                               (-0.1 - 0.2j, 1e-9)))
        txt = ds.to_text()
        assert txt.endswith("\n") and "\r" not in txt
        assert covering.DiskSet.from_text(txt).disks == ds.disks

    def test_positive_radii_enforced(self):
        with pytest.raises(ValueError):
            covering.DiskSet(((0j, 0.0),))


class TestInflate:
    def test_trivial_cases(self):
        assert covering.inflate(covering.DiskSet(()), 0.5).disks == ()
        out = covering.inflate(covering.DiskSet(((0j, 1.0),)), 0.5)
        assert out.disks == ((0j, 1.5),)

    def test_exact_area_identity(self):
        rng = np.random.default_rng(2)
        disks = covering.DiskSet(tuple(
            (complex(x, y), r) for x, y, r in
            zip(rng.uniform(-5, 5, 30), rng.uniform(-5, 5, 30),
                rng.uniform(1e-6, 3.0, 30))))
        for q in (0.0, 1e-9, 0.37, 5.0):
            assert covering.inflation_area_identity(disks, q)


class TestKoebe:
    def test_half(self):
        kc = covering.koebe_constants(0.5)
        assert kc.ratio_fourth == pytest.approx(81.0)
        assert kc.growth_lower == pytest.approx(0.5 / 2.25)
        assert kc.deriv_upper == pytest.approx(1.5 / 0.125)

    def test_tiny(self):
        kc = covering.koebe_constants(2.0 ** -8)
        assert kc.ratio_squared == pytest.approx(1.01575, abs=1e-5)
        assert kc.ratio_squared <= 2.0
        assert kc.ratio_sixth <= 2.0

    def test_limit_to_one(self):
        kc = covering.koebe_constants(1e-12)
        for v in (kc.growth_lower / 1e-12, kc.growth_upper / 1e-12,
                  kc.deriv_lower, kc.deriv_upper, kc.ratio):
            assert v == pytest.approx(1.0, abs=1e-8)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                covering.koebe_constants(bad)


class TestBesicovitch:
    def test_single_point(self):
        disks = covering.besicovitch_cover([0.0], lambda p: 1.0)
        assert disks.disks == ((0j, 1.0),)

    def test_two_separated(self):
        disks = covering.besicovitch_cover([0.0, 3.0], lambda p: 1.0)
        assert len(disks) == 2

    def test_random_cloud_audit(self):
        rng = np.random.default_rng(5)
        pts = rng.random(1000) + 1j * rng.random(1000)
        radii = dict(zip(map(complex, pts), rng.uniform(0.01, 0.05, 1000)))
        disks = covering.besicovitch_cover(pts, lambda p: radii[complex(p)])
        cert = covering.besicovitch_audit(pts, disks, n_probes=10_000, seed=1)
        assert cert.covers_all
        assert cert.max_multiplicity <= covering.BESICOVITCH_MAX_MULTIPLICITY

    def test_dense_same_radius(self):
        rng = np.random.default_rng(8)
        pts = 0.1 * (rng.random(400) + 1j * rng.random(400))
        disks = covering.besicovitch_cover(pts, lambda p: 0.05)
        cert = covering.besicovitch_audit(pts, disks, n_probes=5000, seed=2)
        assert cert.covers_all and cert.max_multiplicity <= 256


class TestFuchsMacintyre:
    def test_single_point(self):
        disks, cert = covering.fuchs_macintyre_disks([0j], 0.1)
        (c, r), = disks.disks
        assert c == 0j and 0.05 <= r <= 0.2
        assert cert.sum_sq_radii <= 4 * 0.1 ** 2 + 1e-18
        assert cert.max_harmonic_sum <= cert.harmonic_bound

    def test_coincident_pair(self):
        disks, cert = covering.fuchs_macintyre_disks([1 + 1j, 1 + 1j], 1.0)
        assert len(disks) == 1
        assert Fraction(cert.sum_sq_radii) <= Fraction(cert.budget)

    def test_heavy_cluster(self):
        disks, cert = covering.fuchs_macintyre_disks([0.5j] * 7, 1.0)
        assert cert.max_harmonic_sum <= cert.harmonic_bound

    def test_hundred_random_points(self):
        rng = np.random.default_rng(5)
        pts = rng.random(100) + 1j * rng.random(100)
        disks, cert = covering.fuchs_macintyre_disks(pts, 0.1)
        assert cert.n_points == 100
        budget = 4 * Fraction(0.1) ** 2
        assert sum(Fraction(r) ** 2 for r in disks.radii()) <= budget

    def test_exact_budget_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(1, 40))
            pts = rng.normal(size=n) + 1j * rng.normal(size=n)
            h = float(rng.uniform(0.02, 2.0))
            disks, cert = covering.fuchs_macintyre_disks(pts, h,
                                                         n_probes=2000)
            assert sum(Fraction(r) ** 2 for r in disks.radii()) \
                <= 4 * Fraction(h) ** 2
            assert cert.max_harmonic_sum <= cert.harmonic_bound * (1 + 1e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            covering.fuchs_macintyre_disks([], 1.0)
        with pytest.raises(ValueError):
            covering.fuchs_macintyre_disks([0j], 0.0)


class TestCartanLevin:
    def test_linear_factor(self):
        disks, cert = covering.cartan_levin_disks([1.0 + 0j], 1.0, 0.1)
        assert cert.sum_radii <= 0.4 + 1e-15
        assert cert.log_m_2eR == pytest.approx(math.log(1 + 2 * math.e), rel=1e-9)
        assert cert.min_log_g > cert.bound_rhs

    def test_empty_zero_list(self):
        disks, cert = covering.cartan_levin_disks([], 1.0, 0.1)
        assert len(disks) == 0 and cert.n_disks == 0

    def test_symmetric_pair(self):
        disks, cert = covering.cartan_levin_disks([1.0, -1.0], 1.0, 0.2)
        assert Fraction(cert.sum_radii) <= 4 * Fraction(0.2) * Fraction(1.0)
        assert cert.min_log_g > cert.bound_rhs

    def test_random_polynomials_up_to_degree_50(self):
        rng = np.random.default_rng(23)
        for _ in range(8):
            n = int(rng.integers(1, 51))
            radius = 2.0 * np.sqrt(rng.random(n))
            angle = 2 * math.pi * rng.random(n)
            zeros = radius * np.exp(1j * angle)
            zeros = zeros[np.abs(zeros) > 1e-6]
            disks, cert = covering.cartan_levin_disks(zeros, 1.0, 0.25,
                                                      n_probes=4000)
            assert sum(Fraction(r) for r in disks.radii()) <= Fraction(1.0)
            assert cert.min_log_g > cert.bound_rhs

    def test_l_exposed_not_enforced(self):
        # the disk count is reported; no bound on it is asserted by design
        disks, cert = covering.cartan_levin_disks([0.5, 0.5j, -0.5], 1.0, 0.3)
        assert cert.n_disks == len(disks)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            covering.cartan_levin_disks([0j], 1.0, 0.1)
        with pytest.raises(ValueError):
            covering.cartan_levin_disks([1.0], 1.0, 5.0)


class TestDensityTransferSmoke:
    def test_affine_maps_preserve_density(self):
        # affine maps have distortion C = 1: densities transfer exactly
        rng = np.random.default_rng(4)
        q = rng.normal(size=4000) + 1j * rng.normal(size=4000)
        p_mask = q.real > 0.3
        for a, b in ((2.0 + 1j, 3.0), (0.5j, -1 + 1j)):
            img = a * q + b
            img_mask = img.real * 0 == 0   # all in f(Q)
            dens_pre = p_mask.mean()
            dens_post = (p_mask & img_mask).mean()
            assert dens_post == pytest.approx(dens_pre)
