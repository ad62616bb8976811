"""Consistency checks tying the tangent and adjoint sweeps to independent oracles.

Four families, each over seeded random probes:

  taylor_order       second-order remainder ratios for smooth models
                     (first-order agreement at kink-free points for models
                     with ReLU kinks; exactly-linear models short-circuit
                     to zero error)
  adjoint_identity   <J dx, z> == <dx, J^T z>
  jacobian_vs_fd     every Jacobian entry against central finite
                     differences, plus row- vs column-assembly agreement
                     (skipped with a notice above the size cap)
  linearity          tangent and adjoint are exactly linear maps

Thresholds here are the repo's normative tolerances. All probes come from
the seeded xorshift64* stream, so a report is a pure function of
(model, seed, samples).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import adjoint, forward, jacobian, tangent
from .graph import ModelGraph
from .layers import RULES, is_smooth
from .prng import Xorshift64Star
from .tensor import Tensor

FD_STEP = 1e-6
TAYLOR_EPSILONS = (1e-2, 5e-3, 2.5e-3)
TAYLOR_RATIO_CENTER = 0.25
TAYLOR_RATIO_HALF_WIDTH = 0.05  # band [0.2, 0.3]
DEFAULT_FD_CAP = 1_000_000
KINK_MARGIN = 1e-8
_LINEAR_FLOOR = 1e-13

THRESHOLDS = {
    "taylor_order": TAYLOR_RATIO_HALF_WIDTH,
    "taylor_first_order": 1e-6,
    "adjoint_identity": 1e-12,
    "jacobian_vs_fd": 1e-6,
    "jacobian_assembly": 1e-13,
    "tangent_linearity": 1e-13,
    "adjoint_linearity": 1e-13,
}


@dataclass
class CheckResult:
    name: str
    model: str
    samples: int
    max_error: float
    threshold: float
    passed: bool
    note: str = ""


@dataclass
class VerificationReport:
    model: str
    seed: int
    samples: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render_text(self) -> str:
        lines = [
            f"model: {self.model}   seed: {self.seed}   samples: {self.samples}",
            f"{'check':<20} {'samples':>7} {'max_error':>12} {'threshold':>12} result",
        ]
        for c in self.checks:
            result = "PASS" if c.passed else "FAIL"
            note = f"   [{c.note}]" if c.note else ""
            lines.append(
                f"{c.name:<20} {c.samples:>7} {c.max_error:>12.3e} {c.threshold:>12.1e} {result}{note}"
            )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "model": self.model,
            "seed": self.seed,
            "samples": self.samples,
            "overall_pass": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "samples": c.samples,
                    "max_error": c.max_error,
                    "threshold": c.threshold,
                    "passed": c.passed,
                    "note": c.note,
                }
                for c in self.checks
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _graph_is_smooth(graph: ModelGraph) -> bool:
    return all(is_smooth(layer) for layer in graph.layers)


def _kink_margin(trace) -> float:
    margin = math.inf
    for entry in trace.entries:
        fn = RULES[entry.layer.kind].relu_margin
        if fn is not None:
            m = fn(entry.layer, entry.x, entry.aux)
            if m is not None:
                margin = min(margin, m)
    return margin


def _draw_probe(rng: Xorshift64Star, graph: ModelGraph, smooth: bool, attempts: int = 64):
    """Probe point from the seeded stream; re-sampled while any ReLU
    pre-activation sits within KINK_MARGIN of zero."""
    n = int(np.prod(graph.input_shape))
    for _ in range(attempts):
        x = Tensor(graph.input_shape, rng.normal_array(n))
        y, trace = forward(graph, x)
        if smooth or _kink_margin(trace) > KINK_MARGIN:
            return x, y, trace
    return x, y, trace


def _rel_gap(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / (denom if denom else 1.0))


def run_verification(
    graph: ModelGraph,
    seed: int,
    samples: int,
    fd_cap: int = DEFAULT_FD_CAP,
) -> VerificationReport:
    rng = Xorshift64Star(seed)
    smooth = _graph_is_smooth(graph)
    n = int(np.prod(graph.input_shape))
    m = int(np.prod(graph.output_shape))
    report = VerificationReport(graph.name, seed, samples)

    report.checks.append(_check_taylor(graph, rng, samples, smooth, n))
    report.checks.append(_check_dot_product(graph, rng, samples, n, m))
    report.checks.extend(_check_jacobian(graph, rng, samples, smooth, n, m, fd_cap))
    report.checks.extend(_check_linearity(graph, rng, samples, n, m))
    return report


def _check_taylor(graph, rng, samples, smooth, n) -> CheckResult:
    """Remainder r(eps) = ||M(x + eps dx) - M(x) - eps J dx|| must shrink
    quadratically for smooth models: r(eps/2)/r(eps) in [0.2, 0.3]."""
    if not smooth:
        return _check_taylor_first_order(graph, rng, samples, n)
    max_err = 0.0
    for _ in range(samples):
        x, y, trace = _draw_probe(rng, graph, smooth)
        dx = rng.normal_array(n)
        jdx = tangent(trace, Tensor(graph.input_shape, dx)).data
        floor = _LINEAR_FLOOR * (1.0 + float(np.linalg.norm(y.data)))

        def remainder(eps: float) -> float:
            yp, _ = forward(graph, Tensor(graph.input_shape, x.data + eps * dx))
            return float(np.linalg.norm(yp.data - y.data - eps * jdx))

        for eps in TAYLOR_EPSILONS:
            r1, r2 = remainder(eps), remainder(eps / 2.0)
            if r1 < floor and r2 < floor:
                continue  # exactly linear to rounding; contributes 0
            max_err = max(max_err, abs(r2 / r1 - TAYLOR_RATIO_CENTER))
    return CheckResult(
        "taylor_order", graph.name, samples, max_err,
        THRESHOLDS["taylor_order"], max_err <= THRESHOLDS["taylor_order"],
        note="remainder ratio vs 0.25",
    )


def _check_taylor_first_order(graph, rng, samples, n) -> CheckResult:
    """Kinked models: the tangent must match a central difference at
    kink-free probes; second-order ratios are undefined across kinks."""
    max_err = 0.0
    for _ in range(samples):
        x, _, trace = _draw_probe(rng, graph, smooth=False)
        dx = rng.normal_array(n)
        jdx = tangent(trace, Tensor(graph.input_shape, dx)).data
        yp, _ = forward(graph, Tensor(graph.input_shape, x.data + FD_STEP * dx))
        ym, _ = forward(graph, Tensor(graph.input_shape, x.data - FD_STEP * dx))
        fd = (yp.data - ym.data) / (2.0 * FD_STEP)
        max_err = max(max_err, _rel_gap(jdx, fd))
    return CheckResult(
        "taylor_order", graph.name, samples, max_err,
        THRESHOLDS["taylor_first_order"], max_err <= THRESHOLDS["taylor_first_order"],
        note="first-order agreement (model has kinks)",
    )


def _check_dot_product(graph, rng, samples, n, m) -> CheckResult:
    """The adjoint identity: <J dx, z> == <dx, J^T z> for random probes."""
    max_err = 0.0
    for _ in range(samples):
        x = Tensor(graph.input_shape, rng.normal_array(n))
        dx = Tensor(graph.input_shape, rng.normal_array(n))
        z = Tensor(graph.output_shape, rng.normal_array(m))
        _, trace = forward(graph, x)
        lhs = float(np.dot(tangent(trace, dx).data, z.data))
        rhs = float(np.dot(dx.data, adjoint(trace, z).data))
        max_err = max(max_err, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return CheckResult(
        "adjoint_identity", graph.name, samples, max_err,
        THRESHOLDS["adjoint_identity"], max_err <= THRESHOLDS["adjoint_identity"],
    )


def _assemble_rows(graph, trace, n, m) -> np.ndarray:
    mat = np.empty((m, n))
    for p in range(m):
        seed = np.zeros(m)
        seed[p] = 1.0
        mat[p, :] = adjoint(trace, Tensor(graph.output_shape, seed)).data
    return mat


def _assemble_cols(graph, trace, n, m) -> np.ndarray:
    mat = np.empty((m, n))
    for q in range(n):
        seed = np.zeros(n)
        seed[q] = 1.0
        mat[:, q] = tangent(trace, Tensor(graph.input_shape, seed)).data
    return mat


def _check_jacobian(graph, rng, samples, smooth, n, m, fd_cap) -> list[CheckResult]:
    """Entrywise FD oracle plus agreement of the two assembly directions."""
    if m * n > fd_cap:
        note = f"skipped: m*n = {m * n} exceeds cap {fd_cap}"
        return [
            CheckResult("jacobian_vs_fd", graph.name, 0, 0.0, THRESHOLDS["jacobian_vs_fd"], True, note),
            CheckResult(
                "jacobian_assembly", graph.name, 0, 0.0, THRESHOLDS["jacobian_assembly"], True, note
            ),
        ]
    fd_err = 0.0
    asm_err = 0.0
    for _ in range(samples):
        x, _, trace = _draw_probe(rng, graph, smooth)
        jac = jacobian(graph, x).matrix
        # jacobian() sweeps the cheaper direction; re-assemble the other one
        other = _assemble_cols(graph, trace, n, m) if m <= n else _assemble_rows(graph, trace, n, m)
        asm_err = max(asm_err, float(np.max(np.abs(jac - other) / (1.0 + np.abs(other)))))
        jfd = np.empty((m, n))
        for q in range(n):
            xp = x.data.copy()
            xm = x.data.copy()
            xp[q] += FD_STEP
            xm[q] -= FD_STEP
            yp, _ = forward(graph, Tensor(graph.input_shape, xp))
            ym, _ = forward(graph, Tensor(graph.input_shape, xm))
            jfd[:, q] = (yp.data - ym.data) / (2.0 * FD_STEP)
        fd_err = max(fd_err, float(np.max(np.abs(jac - jfd) / (1.0 + np.abs(jfd)))))
    return [
        CheckResult(
            "jacobian_vs_fd", graph.name, samples, fd_err,
            THRESHOLDS["jacobian_vs_fd"], fd_err <= THRESHOLDS["jacobian_vs_fd"],
        ),
        CheckResult(
            "jacobian_assembly", graph.name, samples, asm_err,
            THRESHOLDS["jacobian_assembly"], asm_err <= THRESHOLDS["jacobian_assembly"],
        ),
    ]


def _check_linearity(graph, rng, samples, n, m) -> list[CheckResult]:
    """tangent(a dx1 + b dx2) == a tangent(dx1) + b tangent(dx2), same for adjoint."""
    tan_err = 0.0
    adj_err = 0.0
    for _ in range(samples):
        x = Tensor(graph.input_shape, rng.normal_array(n))
        _, trace = forward(graph, x)
        a, b = rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)
        dx1, dx2 = rng.normal_array(n), rng.normal_array(n)
        lhs = tangent(trace, Tensor(graph.input_shape, a * dx1 + b * dx2)).data
        rhs = (
            a * tangent(trace, Tensor(graph.input_shape, dx1)).data
            + b * tangent(trace, Tensor(graph.input_shape, dx2)).data
        )
        tan_err = max(tan_err, _rel_gap(lhs, rhs))
        z1, z2 = rng.normal_array(m), rng.normal_array(m)
        lhs = adjoint(trace, Tensor(graph.output_shape, a * z1 + b * z2)).data
        rhs = (
            a * adjoint(trace, Tensor(graph.output_shape, z1)).data
            + b * adjoint(trace, Tensor(graph.output_shape, z2)).data
        )
        adj_err = max(adj_err, _rel_gap(lhs, rhs))
    return [
        CheckResult(
            "tangent_linearity", graph.name, samples, tan_err,
            THRESHOLDS["tangent_linearity"], tan_err <= THRESHOLDS["tangent_linearity"],
        ),
        CheckResult(
            "adjoint_linearity", graph.name, samples, adj_err,
            THRESHOLDS["adjoint_linearity"], adj_err <= THRESHOLDS["adjoint_linearity"],
        ),
    ]
