"""Low-storage explicit Runge-Kutta time integration.

The workhorse is the five-stage fourth-order scheme of Carpenter and
Kennedy in 2N-storage form: one state array and one accumulator array,
with each stage doing

    k <- a_i k + dt f(t + c_i dt, u)
    u <- u + b_i k.

``integrate`` drives the scheme to a target time with either a fixed
step or a per-step callable (for CFL-based stepping), truncating the
final step to land on t_end exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["SolverDivergenceError", "LowStorageRK", "carpenter_kennedy_rk4", "integrate"]


class SolverDivergenceError(RuntimeError):
    """The solution stopped being finite during time integration."""

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time


_RK4A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
_RK4B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
_RK4C = (
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
)


@dataclass(frozen=True)
class LowStorageRK:
    """2N-storage RK scheme given by its (a, b, c) stage coefficients."""

    a: tuple[float, ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    order: int = field(default=4)

    @property
    def num_stages(self) -> int:
        return len(self.b)

    def step(self, rhs: Callable, u: np.ndarray, t: float, dt: float) -> np.ndarray:
        """Advance one step in place; returns the updated array."""
        k = np.zeros_like(u)
        for a_i, b_i, c_i in zip(self.a, self.b, self.c):
            k *= a_i
            k += dt * rhs(u, t + c_i * dt)
            u += b_i * k
        return u


def carpenter_kennedy_rk4() -> LowStorageRK:
    """The classical five-stage fourth-order low-storage scheme."""
    return LowStorageRK(a=_RK4A, b=_RK4B, c=_RK4C, order=4)


def integrate(
    rhs: Callable,
    u0: np.ndarray,
    t_end: float,
    dt: float | Callable[[np.ndarray, float], float],
    scheme: LowStorageRK | None = None,
    max_steps: int = 10_000_000,
) -> tuple[np.ndarray, int]:
    """March u' = rhs(u, t) from t = 0 to t_end.

    ``dt`` is either a fixed step or a callable ``dt(u, t)`` evaluated at
    the top of every step; the final step is shortened to hit t_end.
    Returns the final state and the number of steps taken.  Raises
    SolverDivergenceError as soon as the state stops being finite.
    """
    if t_end < 0.0:
        raise ValueError("t_end must be non-negative")
    scheme = scheme or carpenter_kennedy_rk4()
    u = np.array(u0, dtype=float, copy=True)
    t = 0.0
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            raise SolverDivergenceError(
                f"step budget of {max_steps} exhausted at t = {t:.6e}", step=steps, time=t
            )
        h = dt(u, t) if callable(dt) else float(dt)
        if not np.isfinite(h) or h <= 0.0:
            raise SolverDivergenceError(
                f"non-positive or non-finite time step {h!r} at t = {t:.6e}",
                step=steps,
                time=t,
            )
        h = min(h, t_end - t)
        u = scheme.step(rhs, u, t, h)
        t += h
        steps += 1
        if not np.all(np.isfinite(u)):
            raise SolverDivergenceError(
                f"solution lost finiteness after step {steps} (t = {t:.6e})",
                step=steps,
                time=t,
            )
    return u, steps
