"""Flows of differential blocks: the solution map (store, tau) -> store.

Affine systems x' = Ax + c get a closed-form flow through the exponential
of the augmented (n+1)x(n+1) matrix [[A, c], [0, 0]].  That matrix is
nilpotent for every double-integrator-style block, in which case the
exponential series terminates and the flow is an exact polynomial in tau;
otherwise scipy's scaling-and-squaring exponential is used.  Non-affine
systems fall back to fixed-step RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .store import Store, Undefined, eval_expr
from .syntax import Call, DiffBlock, Lit, Var


@dataclass(frozen=True, slots=True)
class OdeSystem:
    """Derivative expression per variable, duration excluded."""

    derivs: tuple

    @staticmethod
    def of(block: DiffBlock) -> "OdeSystem":
        return OdeSystem(block.derivs)


@dataclass(frozen=True, slots=True)
class ExactAffine:
    pass


@dataclass(frozen=True, slots=True)
class RungeKutta4:
    step: float = 1e-3

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("RK4 step must be positive")


FlowMethod = ExactAffine | RungeKutta4

EXACT = ExactAffine()
DEFAULT_RK4 = RungeKutta4(1e-3)


def _linear_part(e, n: int):
    """Coefficient vector and constant of `e`, or None if not affine.

    Subtrees without variables are folded to constants; folding failures
    (e.g. a division by zero among constants) make the system non-affine
    so the RK4 fallback surfaces the evaluation error at run time.
    """
    t = type(e)
    if t is Lit:
        return np.zeros(n), e.value
    if t is Var:
        coeff = np.zeros(n)
        coeff[e.index] = 1.0
        return coeff, 0.0
    op = e.op
    parts = [_linear_part(a, n) for a in e.args]
    if any(p is None for p in parts):
        return None
    if op == "+":
        (c1, k1), (c2, k2) = parts
        return c1 + c2, k1 + k2
    if op == "-":
        (c1, k1), (c2, k2) = parts
        return c1 - c2, k1 - k2
    if op == "neg":
        (c1, k1), = parts
        return -c1, -k1
    if op == "*":
        (c1, k1), (c2, k2) = parts
        if not c1.any():
            return k1 * c2, k1 * k2
        if not c2.any():
            return k2 * c1, k2 * k1
        return None
    if op == "/":
        (c1, k1), (c2, k2) = parts
        if c2.any() or k2 == 0.0:
            return None
        return c1 / k2, k1 / k2
    # transcendental: affine only when constant
    if all(not c.any() for c, _ in parts):
        dummy = ()
        try:
            v = eval_expr(Call(op, tuple(Lit(k) for _, k in parts)), dummy)
        except Undefined:
            return None
        return np.zeros(n), v
    return None


@lru_cache(maxsize=4096)
def classify_affine(sys: OdeSystem):
    """(A, c) with x' = Ax + c, by structural inspection; None if non-affine."""
    n = len(sys.derivs)
    rows = []
    consts = []
    for d in sys.derivs:
        part = _linear_part(d, n)
        if part is None:
            return None
        coeff, const = part
        rows.append(coeff)
        consts.append(const)
    return np.array(rows), np.array(consts)


@lru_cache(maxsize=4096)
def _augmented(sys: OdeSystem):
    """Augmented matrix, its nilpotency degree (or None), and cached powers."""
    affine = classify_affine(sys)
    if affine is None:
        return None
    a, c = affine
    n = len(c)
    m = np.zeros((n + 1, n + 1))
    m[:n, :n] = a
    m[:n, n] = c
    powers = [np.eye(n + 1)]
    degree = None
    for k in range(1, n + 2):
        nxt = powers[-1] @ m
        if not nxt.any():
            degree = k
            break
        powers.append(nxt)
    return m, degree, powers


def flow(sys: OdeSystem, store: Store, tau: float, method: FlowMethod | None = None) -> Store:
    """phi(store, tau): evolve the store tau time units along the system.

    With `method=None` the exact affine flow is used when the system is
    affine and RK4(1e-3) otherwise.  Raises Undefined if a derivative (or
    the flow itself) is undefined along the way.
    """
    if tau < 0:
        raise ValueError("flow time must be nonnegative")
    if method is None:
        method = EXACT if classify_affine(sys) is not None else DEFAULT_RK4
    if isinstance(method, ExactAffine):
        aug = _augmented(sys)
        if aug is None:
            raise Undefined("exact flow requested for a non-affine system")
        return _flow_affine(aug, store, tau)
    return _flow_rk4(sys, store, tau, method.step)


def _flow_affine(aug, store: Store, tau: float) -> Store:
    m, degree, powers = aug
    n = len(store)
    if degree == 1:  # all-zero derivatives: the system is halted
        return store
    if degree is not None:
        # nilpotent: the exponential series terminates exactly
        phi = powers[0].copy()
        scale = 1.0
        for k in range(1, degree):
            scale *= tau / k
            phi += scale * powers[k]
    else:
        phi = expm(m * tau)
    vec = phi[:n, :] @ np.append(np.asarray(store, dtype=float), 1.0)
    out = tuple(map(float, vec))
    for v in out:
        if not math.isfinite(v):
            raise Undefined("flow produced a non-finite value")
    return out


def _flow_rk4(sys: OdeSystem, store: Store, tau: float, step: float) -> Store:
    derivs = sys.derivs

    def f(state):
        return [eval_expr(d, state) for d in derivs]

    state = tuple(store)
    remaining = tau
    while remaining > 0.0:
        h = step if remaining >= step else remaining
        k1 = f(state)
        k2 = f(tuple(x + 0.5 * h * k for x, k in zip(state, k1)))
        k3 = f(tuple(x + 0.5 * h * k for x, k in zip(state, k2)))
        k4 = f(tuple(x + h * k for x, k in zip(state, k3)))
        state = tuple(
            x + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for x, a, b, c, d in zip(state, k1, k2, k3, k4)
        )
        for v in state:
            if not math.isfinite(v):
                raise Undefined("RK4 state became non-finite")
        remaining -= h
    return state


def flow_segment(sys: OdeSystem, store: Store, duration: float, grid, method: FlowMethod | None = None):
    """Flow sampled at each grid time within [0, duration].

    Pointwise equal to `flow` at every grid time (same method).
    """
    prev = None
    out = []
    for t in grid:
        if prev is not None and t < prev:
            raise ValueError("grid times must be sorted")
        if not 0.0 <= t <= duration:
            raise ValueError("grid times must lie within [0, duration]")
        prev = t
        out.append((t, flow(sys, store, t, method)))
    return out
