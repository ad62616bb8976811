"""Toy variational assimilation demo driven by the adjoint as gradient engine.

Draws a truth state, takes perfect observations y_obs = M(x_t), and
minimizes C(x) = 0.5 ||M(x) - y_obs||^2 by gradient descent with Armijo
backtracking. The gradient is exactly the scalar-product adjoint path:
grad C = J^T (M(x) - y_obs) = adjoint(trace, residual).

Both the truth and the starting iterate come from the seeded stream, truth
first. The cost trace is non-increasing: an iteration that cannot find a
decreasing step keeps the current state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import adjoint, forward
from .graph import ModelGraph
from .prng import Xorshift64Star
from .tensor import Tensor

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


@dataclass
class DemoResult:
    costs: list[float]
    truth: np.ndarray
    recovered: np.ndarray
    observations: np.ndarray

    @property
    def initial_cost(self) -> float:
        return self.costs[0]

    @property
    def final_cost(self) -> float:
        return self.costs[-1]


def run_demo(graph: ModelGraph, seed: int, iterations: int) -> DemoResult:
    rng = Xorshift64Star(seed)
    n = int(np.prod(graph.input_shape))
    truth = rng.normal_array(n)
    y_obs, _ = forward(graph, Tensor(graph.input_shape, truth))
    x = rng.normal_array(n)

    def cost_of(state: np.ndarray) -> float:
        y, _ = forward(graph, Tensor(graph.input_shape, state))
        return 0.5 * float(np.dot(y.data - y_obs.data, y.data - y_obs.data))

    costs = []
    step = 1.0
    y, trace = forward(graph, Tensor(graph.input_shape, x))
    residual = y.data - y_obs.data
    cost = 0.5 * float(np.dot(residual, residual))
    costs.append(cost)

    for _ in range(int(iterations)):
        grad = adjoint(trace, Tensor(graph.output_shape, residual)).data
        gnorm2 = float(np.dot(grad, grad))
        if gnorm2 == 0.0:
            costs.append(cost)
            continue
        step = min(step * 2.0, 1e12)  # warm start from the previous accepted step
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            candidate = x - step * grad
            c_new = cost_of(candidate)
            if c_new <= cost - _ARMIJO_C1 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if accepted:
            x = candidate
            y, trace = forward(graph, Tensor(graph.input_shape, x))
            residual = y.data - y_obs.data
            cost = 0.5 * float(np.dot(residual, residual))
        costs.append(cost)

    return DemoResult(costs, truth, x, y_obs.data.copy())
