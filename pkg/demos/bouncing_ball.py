"""A ball under gravity, kicked at random times (velocity reversal).

One sampled trajectory of position and velocity over the first five time
units, printed as plot-ready columns.
"""

from swhile import TimeGrid, make_store, parse_file, sample_trajectory

program, table = parse_file("programs/ball.swl")
grid = TimeGrid.regular(0.0, 5.0, 0.25)
trajectory = sample_trajectory(program, make_store(table), grid, seed=20)

p, v = table.index("p"), table.index("v")
print(f"{'t':>6} {'p':>10} {'v':>10}")
for t, point in zip(grid.times, trajectory.points):
    print(f"{t:6.2f} {point.store[p]:10.4f} {point.store[v]:10.4f}")
