"""Adaptive cruise control: safe braking distances and rare collisions.

The deterministic controller closes in on the leader and never collides.
With exponentially distributed phase durations the safety check can be
invalidated by a long phase, so collisions occur with low probability;
the checker counts how often the follower reaches the leader.
"""

from swhile import (
    TimeGrid,
    interval_probability,
    make_store,
    parse_bool_expr,
    parse_file,
    probability_over_time,
    run_ensemble,
    sample_trajectory,
)

cruise, table = parse_file("programs/cruise.swl")
grid = TimeGrid.regular(0.0, 40.0, 2.0)
deterministic = sample_trajectory(cruise, make_store(table), grid, seed=1)
p, pl = table.index("p"), table.index("pl")
gap = min(pt.store[pl] - pt.store[p] for pt in deterministic.points)
print(f"deterministic controller: minimal gap to the leader = {gap:.2f} m")

noisy, noisy_table = parse_file("programs/cruise_exponential.swl")
noisy_grid = TimeGrid.regular(0.0, 30.0, 1.0)
ensemble = run_ensemble(
    noisy, noisy_table, make_store(noisy_table), noisy_grid, runs=50, base_seed=60
)
collided = parse_bool_expr("pl <= p", noisy_table)
series = probability_over_time(ensemble, collided)
print("\ncollision fraction over time (50 runs):")
for t, frac in zip(series.times, series.fractions):
    if t % 5 == 0:
        print(f"  t = {t:4.1f}: {frac:.2f}")
window = interval_probability(ensemble, collided, 10.0, 20.0)
print(f"\ncollision anywhere in [10, 20]: {window.fraction:.2f} "
      f"({window.satisfying_runs}/{window.runs} runs)")
