#!/usr/bin/env python3
"""Forward vs dual: two independent simulators, one answer.

The forward torus dynamics and the coalescing dual walkers never share
code paths, yet the persistence probability P(T_t = t), the tail
P(T_t >= 0.75 t) and the two-time covariance must agree.  This is the
package's strongest correctness check (the acceptance suite runs it at
10x these replica counts).
"""

import math

import voterlab as vl
from voterlab.dual_coalescer import sample_batch
from voterlab.estimators import dual_meeting_prob, persistence_from_batch, tail_from_batch
from voterlab.streams import replica_keys

SEED = 99
T = 16.0
RHO = 0.5


def verdict(lhs, lse, rhs, rse):
    z = abs(lhs - rhs) / math.hypot(lse, rse)
    return f"z = {z:.2f} ({'agree' if z <= 3 else 'DISAGREE'})"


def main():
    torus = vl.TorusConfig(side=32, horizon=T, rho=RHO)

    print(f"== persistence P(T_t = t) at t={T}, rho={RHO} ==")
    fwd = vl.forward_persistence_mc(torus, 150_000, SEED)
    batch = sample_batch(T, 30_000, replica_keys(SEED, 30_000), want_masses=True)
    dual = persistence_from_batch(batch, RHO)
    print(f"  forward torus:  {fwd.mean:.5f} +- {fwd.stderr:.5f}")
    print(f"  dual lineages:  {dual.mean:.5f} +- {dual.stderr:.5f}")
    print(f"  {verdict(fwd.mean, fwd.stderr, dual.mean, dual.stderr)}")

    print(f"\n== tail P(T_t >= 0.75 t) ==")
    fwd_t = vl.forward_tail_mc(torus, 0.75, 150_000, SEED + 1)
    dual_t = tail_from_batch(batch, RHO, 0.75, 256, replica_keys(SEED, 30_000, stream=1))
    print(f"  forward torus:  {fwd_t.mean:.5f} +- {fwd_t.stderr:.5f}")
    print(f"  dual masses:    {dual_t.prob:.5f} +- {dual_t.stderr:.5f}")
    print(f"  {verdict(fwd_t.mean, fwd_t.stderr, dual_t.prob, dual_t.stderr)}")

    print(f"\n== covariance Cov(eta_2(0), eta_6(0)) ==")
    fwd_c = vl.forward_covariance_mc(torus, 2.0, 6.0, 80_000, SEED + 2)
    meet = dual_meeting_prob(T, 2.0, 6.0, 30_000, SEED + 3)
    rhs = RHO * (1 - RHO) * meet.mean
    rse = RHO * (1 - RHO) * meet.stderr
    print(f"  forward covariance:        {fwd_c.value:.5f} +- {fwd_c.stderr:.5f}")
    print(f"  rho(1-rho) P(coalesce):    {rhs:.5f} +- {rse:.5f}")
    print(f"  {verdict(fwd_c.value, fwd_c.stderr, rhs, rse)}")

    print("\n(CLI equivalent: voterlab duality-check --seed 99)")


if __name__ == "__main__":
    main()
