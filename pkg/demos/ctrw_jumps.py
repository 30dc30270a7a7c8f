"""Continuous-time random walk: jump counts over a time window.

With uniform waiting times on [0,1] the walker jumps about twice per
time unit, so a five-unit window sees roughly ten jumps on average.
"""

from swhile import TimeGrid, make_store, moments, parse_file, run_ensemble

program, table = parse_file("programs/ctrw_counting.swl")
grid = TimeGrid.from_times((0.0, 5.0))
ensemble = run_ensemble(program, table, make_store(table), grid, runs=500, base_seed=99)

m = moments(ensemble, "c", 5.0)
print(f"mean jumps in [0,5] over {m.count} runs: {m.mean:.2f}  (std {m.std:.2f})")

single = run_ensemble(program, table, make_store(table), grid, runs=1, base_seed=99)
c = single.trajectories[0].points[-1].store[table.index("c")]
print(f"one sampled run performed {c:.0f} jumps")
