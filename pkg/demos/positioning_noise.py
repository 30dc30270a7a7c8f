"""Moving a particle to position 3: exact switching versus noisy switching.

With both phase durations exactly sqrt(3) the particle stops precisely at
position three.  Adding exponential noise to the durations overshoots the
target and distorts the velocity profile.
"""

import math

from swhile import Config, from_seed, make_store, parse_file, run_to_terminal, split_seed

t_query = 2 * math.sqrt(3) + 2.0

exact, exact_table = parse_file("programs/positioning_exact.swl")
result = run_to_terminal(Config(exact, make_store(exact_table), t_query, from_seed(0)))
print(f"exact durations:  p = {result.store[exact_table.index('p')]: .6f}   "
      f"v = {result.store[exact_table.index('v')]: .6f}")

noisy, noisy_table = parse_file("programs/positioning.swl")
for i in range(5):
    result = run_to_terminal(
        Config(noisy, make_store(noisy_table), t_query, from_seed(split_seed(8, i)))
    )
    p = result.store[noisy_table.index("p")]
    v = result.store[noisy_table.index("v")]
    print(f"noisy run {i}:      p = {p: .6f}   v = {v: .6f}")
