#!/usr/bin/env python3
"""From Monte Carlo sweep to machine-size estimate.

Runs a quick logical-error sweep over code distance, fits the
sub-exponential trial curve p_log(d) = A (alpha + beta d)^(gamma d + delta),
and extrapolates to the distance needed for two target machines: one that
beats brute-force classical simulation, and one sized for a 6x6 Hubbard
model computation.

To keep the demo fast the sweep runs at an inflated physical error rate
(p = 0.4%), where failures are frequent enough that 20k shots per point
give usable statistics.  The printed machine sizes therefore describe a
noisier device than the headline p = 0.1% scenario; rerun with p = 1e-3
and ~10x the shots for the paper-scale numbers.
"""

import time

from shuttleqec import analysis, circuits, decoders, noise, sampler

np_ = noise.NoiseParams(p=4e-3, T2_star=20e-6)
points = []
print(f"{'d':>3} {'fails':>6} {'p_log/round':>12} {'secs':>6}")
for d in (3, 5, 7, 9, 11):
    c = circuits.synth_surface_cycle(d, rounds=d, wide=True)
    nc = noise.annotate(c, np_)
    dem = sampler.build_dem(nc)
    shots = 20_000
    t0 = time.time()
    batch = sampler.sample(dem, shots, seed=100 + d)
    graph = decoders.MatchingGraph.from_dem(dem)
    fails = sum(
        int((decoders.mwpm_decode(dem, batch.syndromes[i],
                                  graph=graph)
             != batch.observable_flips[i]).any())
        for i in range(shots))
    p_log = analysis.per_round_per_qubit(fails / shots, k=1, d=d)
    points.append((d, p_log))
    print(f"{d:>3} {fails:>6} {p_log:>12.3e} {time.time() - t0:>6.1f}")

fit = analysis.fit_trial(points, seed=0)
print(f"\nfit: A={fit.A:.3g} alpha={fit.alpha:.3g} beta={fit.beta:.3g} "
      f"gamma={fit.gamma:.3g} delta={fit.delta:.3g}")

for scenario in ("nisq-beating", "hubbard-6x6"):
    rep = analysis.resource_estimate(scenario, np_, fit=fit)
    print(f"\n--- {scenario} ---")
    for key in ("patches", "distance", "data_qubits", "physical_qubits",
                "cycles", "wall_clock_days", "target_p_log"):
        if key in rep:
            print(f"  {key}: {rep[key]}")
