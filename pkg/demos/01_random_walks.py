#!/usr/bin/env python3
"""Random-walk primitives: paths, hitting probabilities, references.

Walks jump at total rate 1 (exponential holding times, uniform
neighbour), so E|X(t)|^2 = t.  Hitting-versus-exit probabilities have a
known logarithmic order, and a sparse linear solve on the disc gives
exact values to check Monte Carlo against.
"""

import math

import voterlab as vl
from voterlab.lattice_walks import sample_srw_endpoints

SEED = 2024


def main():
    print("== one path ==")
    final, times, pos = vl.sample_srw((0, 0), 30.0, SEED, return_path=True)
    print(f"30 time units -> {times.size} jumps, final site {tuple(final)}")

    print("\n== rate convention: E|X(t)|^2 = t ==")
    for t in (25.0, 100.0):
        pts = sample_srw_endpoints((0, 0), t, 50_000, SEED)
        msd = (pts.astype(float) ** 2).sum(axis=1).mean()
        print(f"  t={t:6.0f}: mean squared displacement {msd:8.2f}")

    print("\n== hitting the origin before exiting a disc ==")
    t = 10_000.0
    for exponent in (0.125, 0.25, 0.375):
        x = (int(round(t**exponent)), 0)
        mc = vl.hit_origin_before_exit_mc(x, math.sqrt(t), 10_000, SEED)
        ref = vl.lawler_reference_hit_before_exit(x, t)
        exact = vl.hit_origin_before_exit_exact(x, math.sqrt(t))
        print(
            f"  |x|={x[0]:3d}: mc={mc.mean:.4f}+-{mc.stderr:.4f} "
            f"exact={exact:.4f}  log-order reference={ref:.4f}"
        )
    print("  (the reference gives the order; the exact solve the value)")

    print("\n== two walks started at different times ==")
    t = 1000.0
    for s in (t / math.log(t), t / 4, 0.45 * t):
        est = vl.meet_prob_mc(s, t, 10_000, SEED)
        ref = (math.log(t) - math.log(s)) / math.log(t)
        flag = " (outside validity window)" if est.warning else ""
        print(f"  s={s:7.1f}: meet prob {est.mean:.4f}, reference order {ref:.4f}{flag}")

    print("\n== annulus confinement (tiny but positive) ==")
    est = vl.annulus_stay_prob_mc(100.0, 500_000, SEED)
    print(
        f"  P(|X| stays in (10, 14.1) over [25, 100]) ~ {est.mean:.2e} "
        f"+- {est.stderr:.1e}"
    )


if __name__ == "__main__":
    main()
