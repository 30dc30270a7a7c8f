"""Time-based termination, step by step.

An unbounded loop that bumps a counter and then halts the system for one
time unit can still be evaluated at any time instant: the remaining time
runs out inside some wait, which forces termination with the store at
that moment.  This script shows the transition chain at t = 1.5 and then
checks that all four semantic views agree on the result.
"""

from swhile import (
    Config,
    Discretization,
    XPoint,
    denote,
    eval_big,
    eval_functional,
    from_seed,
    parse_program,
    pretty_print,
    trace,
)

SOURCE = "x := 0 ; while tt { x++ ; wait 1 }"

program, table = parse_program(SOURCE)
print("program:", SOURCE)
print()

configs, terminal = trace(Config(program, (0.0,), 1.5, from_seed(0)))
print(f"small-step chain at t = 1.5 ({len(configs)} configurations):")
for c in configs:
    text = pretty_print(c.program, table, inline=True)
    print(f"  x = {c.store[0]:<4}  t = {c.t:<4}  {text}")
print("  terminal:", terminal)
print()

big = eval_big(Config(program, (0.0,), 1.5, from_seed(0)), fuel=100)
fun = eval_functional(program, (0.0,), 1.5, from_seed(0), fuel=6)
print("big-step:   ", big)
print("functional: ", fun)

kernel = denote(program, Discretization(2), max_unfold=6)
print("denotation: ", kernel(XPoint((0.0,), 1.5)))
