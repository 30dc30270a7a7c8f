"""Random-walk approximation of the standard normal distribution.

After 101 fair ±1 steps scaled by sqrt(100), the walk's endpoint is
approximately standard normal; the histogram over two thousand runs is
bell-shaped and the sample moments sit near (0, 1).
"""

from swhile import TimeGrid, histogram, make_store, moments, parse_file, run_ensemble

program, table = parse_file("programs/random_walk.swl")
grid = TimeGrid.from_times((0.0, 1.0))
ensemble = run_ensemble(program, table, make_store(table), grid, runs=2000, base_seed=31337)

m = moments(ensemble, "x", 0.0)
print(f"runs: {m.count}   mean: {m.mean:+.4f}   std: {m.std:.4f}")
print()
hist = histogram(ensemble, "x", 0.0, bins=15)
peak = max(hist.counts)
for i, count in enumerate(hist.counts):
    bar = "#" * round(40 * count / peak)
    print(f"[{hist.edges[i]:+6.2f}, {hist.edges[i+1]:+6.2f}) {count:5d} {bar}")
