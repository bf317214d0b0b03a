#!/usr/bin/env python3
"""Compare each distance density against a histogram of sampled positions.

Prints the integral of every density and the total-variation distance
between the density and the sampled histogram. The conditional source-BS
density is shown against two samplers: a source uniform in the disc of
radius d_SC and a source on the circle of radius d_SC.
"""

import numpy as np

from d2d_underlay.geometry import (
    DistanceParams,
    pdf_d_cb,
    pdf_d_cm,
    pdf_d_mb,
    pdf_d_md_given,
    pdf_d_sb_given,
    pdf_d_sc,
    sample_uniform_disc,
)

N = 400_000
BINS = 200


def compare(label, samples, pdf, lo, hi):
    edges = np.linspace(lo, hi, BINS + 1)
    hist, _ = np.histogram(samples, edges, density=True)
    fine = np.linspace(lo, hi, 200_001)
    vals = np.asarray(pdf(fine))
    total = np.trapezoid(vals, fine) if hasattr(np, "trapezoid") else np.trapz(vals, fine)
    mids = 0.5 * (edges[1:] + edges[:-1])
    tv = 0.5 * np.sum(np.abs(hist - np.asarray(pdf(mids)))) * (edges[1] - edges[0])
    print(f"{label:<34} integral {total:.6f}   TV vs samples {tv:.4f}")


def main():
    rng = np.random.default_rng(0)
    dp = DistanceParams(2000.0, 500.0)
    R, r = dp.R, dp.r
    C = sample_uniform_disc((0, 0), R - r, rng, size=N)
    M = sample_uniform_disc((0, 0), R, rng, size=N)
    S = sample_uniform_disc(C, r, rng, size=N)
    norm = lambda v: np.hypot(v[:, 0], v[:, 1])  # noqa: E731

    compare("d_CB", norm(C), lambda x: pdf_d_cb(x, dp), 0, R - r)
    compare("d_SC", norm(S - C), lambda x: pdf_d_sc(x, dp), 0, r)
    compare("d_MB", norm(M), lambda x: pdf_d_mb(x, dp), 0, R)
    compare("d_CM", norm(C - M), lambda x: pdf_d_cm(x, dp), 0, 2 * R - r)

    d_cm = 800.0
    D = sample_uniform_disc((d_cm, 0.0), r, rng, size=N)
    compare(f"d_MD | d_CM={d_cm:g}", norm(D), lambda x: pdf_d_md_given(x, d_cm, dp), d_cm - r, d_cm + r)

    d_sc, d_cb = 300.0, 1000.0
    f = lambda x: pdf_d_sb_given(x, d_sc, d_cb)  # noqa: E731
    disc = sample_uniform_disc((d_cb, 0.0), d_sc, rng, size=N)
    compare("d_SB | source in disc", norm(disc), f, d_cb - d_sc, d_cb + d_sc)
    ang = rng.uniform(0, 2 * np.pi, N)
    ring = np.hypot(d_cb + d_sc * np.cos(ang), d_sc * np.sin(ang))
    compare("d_SB | source on circle", ring, f, d_cb - d_sc, d_cb + d_sc)


if __name__ == "__main__":
    main()
