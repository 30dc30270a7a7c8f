"""Brownian-style motion: position spread grows over time.

A hundred overlaid runs of the collision process; the standard deviation
of the particle position widens as time passes, which is the shape the
overlay plots show.
"""

from swhile import TimeGrid, make_store, moments, parse_file, run_ensemble

program, table = parse_file("programs/brownian.swl")
grid = TimeGrid.regular(0.0, 5.0, 1.0)
ensemble = run_ensemble(program, table, make_store(table), grid, runs=100, base_seed=5150)

print(f"{'t':>4} {'mean p':>10} {'std p':>10}")
for t in grid.times:
    m = moments(ensemble, "p", t)
    print(f"{t:4.1f} {m.mean:10.4f} {m.std:10.4f}")
