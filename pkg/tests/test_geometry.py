import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats
from scipy.stats import qmc

from d2d_underlay.geometry import (
    DegenerateGeometryError,
    DistanceParams,
    Point2D,
    circle_intersection_area,
    pdf_d_cb,
    pdf_d_cm,
    pdf_d_mb,
    pdf_d_md_given,
    pdf_d_sb_given,
    pdf_d_sc,
    sample_uniform_disc,
)

TABLE = DistanceParams(2000.0, 500.0)


def lens_oracle(a, b, d, m=20):
    """Area of disc(0, a) ∩ disc((d, 0), b) from 2**m scrambled Sobol points
    over the bounding square of the smaller disc."""
    small, big = min(a, b), max(a, b)
    # put the smaller disc at the origin
    pts = qmc.Sobol(2, scramble=True, seed=7).random_base2(m)
    xy = (pts * 2.0 - 1.0) * small
    in_small = np.hypot(xy[:, 0], xy[:, 1]) <= small
    in_big = np.hypot(xy[:, 0] - d, xy[:, 1]) <= big
    return 4.0 * small * small * np.mean(in_small & in_big)


# ------------------------------------------------------------ disc sampling


def test_tiny_disc_collapses_to_center():
    rng = np.random.default_rng(0)
    p = sample_uniform_disc((3.0, -2.0), 1e-12, rng)
    assert isinstance(p, Point2D)
    assert p == pytest.approx((3.0, -2.0), abs=1e-9)


@pytest.mark.parametrize("radius", [0.0, -1.0])
def test_non_positive_radius_rejected(radius):
    with pytest.raises(ValueError):
        sample_uniform_disc((0, 0), radius, np.random.default_rng(0))


def test_disc_sample_moments():
    rng = np.random.default_rng(1)
    pts = sample_uniform_disc((0.0, 0.0), 1.0, rng, size=100_000)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    assert rho.max() <= 1.0
    assert rho.mean() == pytest.approx(2 / 3, abs=0.01)
    assert np.mean(rho <= 0.5) == pytest.approx(0.25, abs=0.01)


def test_disc_sample_annulus_chi2():
    rng = np.random.default_rng(2)
    radius = 7.0
    pts = sample_uniform_disc((1.0, 1.0), radius, rng, size=100_000)
    rho = np.hypot(pts[:, 0] - 1.0, pts[:, 1] - 1.0)
    edges = np.linspace(0, radius, 21)
    observed, _ = np.histogram(rho, edges)
    expected = np.diff(edges**2) / radius**2 * rho.size
    assert stats.chisquare(observed, expected).pvalue > 1e-3


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.0, 0.95), w=st.floats(0.05, 1.0), seed=st.integers(0, 2**32 - 1))
def test_disc_sample_annulus_mass(a, w, seed):
    b = min(1.0, a + w)
    pts = sample_uniform_disc((0.0, 0.0), 1.0, np.random.default_rng(seed), size=20_000)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    mass = b * b - a * a
    se = math.sqrt(mass * (1 - mass) / rho.size)
    assert abs(np.mean((rho >= a) & (rho < b)) - mass) <= 5 * se + 1e-3


# ------------------------------------------------------- intersection area


def test_intersection_examples():
    assert circle_intersection_area(1, 1, 0) == pytest.approx(math.pi)
    assert circle_intersection_area(1, 1, 3) == 0.0
    expected = 2 * math.acos(0.5) - math.sqrt(3) / 2
    assert expected == pytest.approx(1.2284, abs=1e-4)
    assert circle_intersection_area(1, 1, 1) == pytest.approx(expected, rel=1e-12)
    assert lens_oracle(1, 1, 1) == pytest.approx(expected, rel=2e-3)


def test_intersection_containment_and_zero_radius():
    assert circle_intersection_area(5.0, 1.0, 2.0) == pytest.approx(math.pi)
    assert circle_intersection_area(1.0, 5.0, 2.0) == pytest.approx(math.pi)
    assert circle_intersection_area(0.0, 5.0, 2.0) == 0.0


def test_intersection_vectorized():
    out = circle_intersection_area(np.array([1.0, 1.0, 1.0]), 1.0, np.array([0.0, 1.0, 3.0]))
    assert out.shape == (3,)
    assert out[0] == pytest.approx(math.pi)
    assert out[2] == 0.0


pos = st.floats(0.01, 100.0)


@given(a=pos, b=pos, d=st.floats(0.0, 250.0))
def test_intersection_symmetric_and_bounded(a, b, d):
    ab = circle_intersection_area(a, b, d)
    assert ab == pytest.approx(circle_intersection_area(b, a, d), rel=1e-9, abs=1e-9)
    assert -1e-9 <= ab <= math.pi * min(a, b) ** 2 * (1 + 1e-12)


@given(a=pos, b=pos, d1=st.floats(0.0, 250.0), d2=st.floats(0.0, 250.0))
def test_intersection_monotone_in_separation(a, b, d1, d2):
    lo, hi = sorted((d1, d2))
    scale = math.pi * max(a, b) ** 2
    assert circle_intersection_area(a, b, hi) <= circle_intersection_area(a, b, lo) + 1e-9 * scale


def test_intersection_matches_point_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = rng.uniform(0.1, 10.0, 2)
        d = rng.uniform(0.0, 0.9 * (a + b))
        ref = lens_oracle(a, b, d)
        assert circle_intersection_area(a, b, d) == pytest.approx(ref, rel=2e-3)


# ---------------------------------------------------------------- densities


def test_pdf_endpoints():
    R, r = TABLE.R, TABLE.r
    assert pdf_d_cb(R - r, TABLE) == pytest.approx(2 / (R - r))
    assert pdf_d_cb(R - r + 1, TABLE) == 0.0
    assert pdf_d_sc(r, TABLE) == pytest.approx(2 / r)
    assert pdf_d_sc(0.0, TABLE) == 0.0
    assert pdf_d_mb(R, TABLE) == pytest.approx(2 / R)
    assert pdf_d_mb(0.0, TABLE) == 0.0
    assert pdf_d_cm(np.nextafter(r, 0), TABLE) == pytest.approx(2 * r / R**2)
    assert pdf_d_cm(2 * R - r + 1, TABLE) == 0.0


def test_conditional_pdf_boundaries():
    # psi = 1 on the outer edge of the support
    assert pdf_d_sb_given(900.0, 100.0, 800.0) == pytest.approx(0.0, abs=1e-12)
    assert pdf_d_sb_given(950.0, 100.0, 800.0) == 0.0
    assert pdf_d_sb_given(650.0, 100.0, 800.0) == 0.0
    assert pdf_d_md_given(1100.0, 600.0, TABLE) == pytest.approx(0.0, abs=1e-12)
    assert pdf_d_md_given(1200.0, 600.0, TABLE) == 0.0


def test_degenerate_conditioning_raises():
    with pytest.raises(DegenerateGeometryError):
        pdf_d_sb_given(10.0, 0.0, 800.0)
    with pytest.raises(DegenerateGeometryError):
        pdf_d_sb_given(10.0, 10.0, 0.0)
    with pytest.raises(DegenerateGeometryError):
        pdf_d_md_given(10.0, 0.0, TABLE)


def _quad(f, lo, hi, points=()):
    cuts = sorted({lo, hi, *[p for p in points if lo < p < hi]})
    return sum(integrate.quad(f, a, b, limit=200, epsabs=1e-12)[0] for a, b in zip(cuts[:-1], cuts[1:]))


@pytest.mark.parametrize(
    "pdf, hi",
    [
        (pdf_d_cb, TABLE.R - TABLE.r),
        (pdf_d_sc, TABLE.r),
        (pdf_d_mb, TABLE.R),
        (pdf_d_cm, 2 * TABLE.R - TABLE.r),
    ],
)
def test_unconditional_pdfs_normalized(pdf, hi):
    total = _quad(lambda x: pdf(x, TABLE), 0.0, hi, points=(TABLE.r,))
    assert total == pytest.approx(1.0, abs=1e-6)


def test_conditional_pdfs_normalized():
    rng = np.random.default_rng(4)
    assert _quad(lambda x: pdf_d_sb_given(x, 100.0, 800.0), 700, 900) == pytest.approx(1.0, abs=1e-3)
    assert _quad(lambda x: pdf_d_md_given(x, 600.0, TABLE), 100, 1100) == pytest.approx(1.0, abs=1e-3)
    for _ in range(50):
        d_sc = rng.uniform(1.0, TABLE.r)
        d_cb = rng.uniform(1.0, TABLE.R - TABLE.r)
        lo, hi = max(d_cb - d_sc, 0.0), d_cb + d_sc
        total = _quad(lambda x: pdf_d_sb_given(x, d_sc, d_cb), lo, hi, points=(abs(d_sc - d_cb),))
        assert total == pytest.approx(1.0, abs=1e-3)
        d_cm = rng.uniform(1.0, 2 * TABLE.R - TABLE.r)
        lo, hi = max(d_cm - TABLE.r, 0.0), d_cm + TABLE.r
        total = _quad(lambda x: pdf_d_md_given(x, d_cm, TABLE), lo, hi, points=(abs(TABLE.r - d_cm),))
        assert total == pytest.approx(1.0, abs=1e-3)


@given(d=st.floats(-100.0, 5000.0))
def test_pdfs_nonnegative(d):
    for pdf in (pdf_d_cb, pdf_d_sc, pdf_d_mb, pdf_d_cm):
        assert pdf(d, TABLE) >= 0.0
    assert pdf_d_sb_given(d, 300.0, 1000.0) >= 0.0
    assert pdf_d_md_given(d, 700.0, TABLE) >= 0.0


def _hist_check(samples, pdf, lo, hi, bins=40):
    edges = np.linspace(lo, hi, bins + 1)
    observed, _ = np.histogram(samples, edges)
    probs = np.array([integrate.quad(pdf, a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
    keep = probs * samples.size > 20
    expected = probs[keep] / probs[keep].sum() * observed[keep].sum()
    return stats.chisquare(observed[keep], expected).pvalue


def test_cluster_center_distance_matches_pdf():
    rng = np.random.default_rng(5)
    c = sample_uniform_disc((0, 0), TABLE.R - TABLE.r, rng, size=100_000)
    p = _hist_check(np.hypot(c[:, 0], c[:, 1]), lambda x: pdf_d_cb(x, TABLE), 0, TABLE.R - TABLE.r)
    assert p > 1e-3


def test_center_to_macro_distance_matches_pdf():
    rng = np.random.default_rng(6)
    c = sample_uniform_disc((0, 0), TABLE.R - TABLE.r, rng, size=200_000)
    m = sample_uniform_disc((0, 0), TABLE.R, rng, size=200_000)
    d = np.hypot(*(c - m).T)
    assert _hist_check(d, lambda x: pdf_d_cm(x, TABLE), 0, 2 * TABLE.R - TABLE.r) > 1e-3


def test_macro_to_destination_matches_pdf():
    rng = np.random.default_rng(7)
    d_cm = 600.0
    pts = sample_uniform_disc((d_cm, 0.0), TABLE.r, rng, size=100_000)
    d = np.hypot(pts[:, 0], pts[:, 1])
    assert _hist_check(d, lambda x: pdf_d_md_given(x, d_cm, TABLE), 100, 1100) > 1e-3


def test_source_to_bs_pdf_is_the_disc_law():
    """The conditional source-BS density is the law of a point uniform in the
    disc of radius d_SC. A source constrained to the circle of radius d_SC has
    a different law; the outage integral samples positions directly and is
    unaffected."""
    rng = np.random.default_rng(8)
    d_sc, d_cb = 300.0, 1000.0
    f = lambda x: pdf_d_sb_given(x, d_sc, d_cb)  # noqa: E731
    disc = sample_uniform_disc((d_cb, 0.0), d_sc, rng, size=100_000)
    assert _hist_check(np.hypot(*disc.T), f, d_cb - d_sc, d_cb + d_sc) > 1e-3

    ang = rng.uniform(0, 2 * np.pi, 100_000)
    ring = np.hypot(d_cb + d_sc * np.cos(ang), d_sc * np.sin(ang))
    assert _hist_check(ring, f, d_cb - d_sc, d_cb + d_sc) < 1e-6
