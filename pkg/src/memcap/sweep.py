"""Grid sweeps, reference curves and method cross-comparison.

Library backing for the command-line front end: evaluates the capacity
of one parameter point with any subset of the available methods
(transfer-operator iteration, exact block-entropy oracle, Monte-Carlo
estimator, closed-form reference curves) and streams grid sweeps as CSV.

Grid points are independent; set MEMCAP_THREADS to evaluate them in a
process pool.  Row order and output bytes do not depend on the worker
count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from . import blackwell as bw
from .channel import (
    CP_WINDOW,
    ChannelParams,
    CPViolationError,
    ParameterError,
    build_joint_chain,
    from_physical,
)
from .oracle import entropy_rate_oracle, mc_entropy_rate

METHODS = ("blackwell", "oracle_n", "monte_carlo", "references")

CSV_COLUMNS = (
    "s", "a_bar", "d", "q00", "x0_noerr", "x1_noerr",
    "capacity_blackwell", "entropy_blackwell", "blackwell_iterations", "blackwell_delta",
    "capacity_oracle", "entropy_oracle_diff", "entropy_oracle_ratio", "oracle_n",
    "capacity_mc", "entropy_mc", "mc_stderr", "mc_steps",
    "ref_avg_capacity", "ref_avg_channel", "ref_low_noise_sub", "ref_noisier_sub",
    "ref_min_capacity",
)


def binary_entropy(p: float) -> float:
    """H2(p) in bits, with H2(0) = H2(1) = 0."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


@dataclass(frozen=True)
class AxisSpec:
    """Evenly spaced axis values: count points from start to stop."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError(f"axis count must be >= 1, got {self.count}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SolverKnobs:
    """All tunables of the capacity solvers, recorded in every CSV."""

    tol: float = bw.TOL
    max_iter: int = bw.MAX_ITER
    merge_tol: float = bw.MERGE_TOL
    prune_tol: float = bw.PRUNE_TOL
    atom_budget: int = bw.ATOM_BUDGET
    oracle_n: int = 16
    mc_steps: int = 10**6
    seed: int = 12345
    cross_tol: float = 1e-4

    def describe(self) -> str:
        return (
            f"tol={self.tol:g} max_iter={self.max_iter} "
            f"merge_tol={self.merge_tol:g} prune_tol={self.prune_tol:g} "
            f"atom_budget={self.atom_budget} oracle_n={self.oracle_n} "
            f"mc_steps={self.mc_steps} seed={self.seed} "
            f"cross_tol={self.cross_tol:g}"
        )


@dataclass(frozen=True)
class SweepSpec:
    """A grid over (s, a_bar, d) plus the methods to run on each point.

    With d_policy="max_allowed" the d axis is ignored and d is set to
    min(a_bar - 1/3, 1 - a_bar), the largest sub-channel separation that
    keeps both no-error probabilities inside the CP window.
    """

    s_axis: AxisSpec
    a_axis: AxisSpec
    d_axis: AxisSpec | None = None
    d_policy: str = "explicit"
    methods: tuple[str, ...] = ("blackwell",)
    knobs: SolverKnobs = field(default_factory=SolverKnobs)

    def __post_init__(self):
        if self.d_policy not in ("explicit", "max_allowed"):
            raise ParameterError(f"unknown d_policy {self.d_policy!r}")
        if self.d_policy == "explicit" and self.d_axis is None:
            raise ParameterError("explicit d_policy needs a d axis")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ParameterError(f"unknown methods {sorted(unknown)}")

    def grid(self) -> list[tuple[float, float, float]]:
        """Grid points in lexicographic (s, a_bar, d) order."""
        points = []
        d_values = self.d_axis.values() if self.d_axis is not None else (None,)
        for s in self.s_axis.values():
            for a in self.a_axis.values():
                if self.d_policy == "max_allowed":
                    ds = (min(a - 1.0 / 3.0, 1.0 - a),)
                else:
                    ds = d_values
                for d in ds:
                    points.append((float(s), float(a), float(d)))
        return points


@dataclass(frozen=True)
class RefCurves:
    """Closed-form reference capacities for sub-channels (a_bar, d)."""

    avg_capacity: float     # limit of full correlation: mean sub-channel capacity
    avg_channel: float      # no correlation: capacity of the averaged channel
    low_noise_sub: float
    noisier_sub: float
    min_capacity: float     # the persistent-switching discontinuity value


def reference_curves(a_bar: float, d: float) -> RefCurves:
    """Reference capacities bracketing the memory channel's capacity."""
    lo, hi = CP_WINDOW
    for label, value in (("a_bar + d", a_bar + d), ("a_bar - d", a_bar - d)):
        if not lo <= value <= hi:
            raise CPViolationError(
                f"{label} = {value!r} outside the complete-positivity "
                f"window [1/3, 1]"
            )
    cap_plus = 1.0 - binary_entropy(a_bar + d)
    cap_minus = 1.0 - binary_entropy(a_bar - d)
    return RefCurves(
        avg_capacity=0.5 * (cap_plus + cap_minus),
        avg_channel=1.0 - binary_entropy(a_bar),
        low_noise_sub=max(cap_plus, cap_minus),
        noisier_sub=min(cap_plus, cap_minus),
        min_capacity=min(cap_plus, cap_minus),
    )


@dataclass
class ResultRow:
    """One evaluated grid point; absent methods leave fields at None."""

    s: float | None
    a_bar: float | None
    d: float | None
    q00: float
    x0_noerr: float
    x1_noerr: float
    capacity_blackwell: float | None = None
    entropy_blackwell: float | None = None
    blackwell_iterations: int | None = None
    blackwell_delta: float | None = None
    capacity_oracle: float | None = None
    entropy_oracle_diff: float | None = None
    entropy_oracle_ratio: float | None = None
    oracle_n: int | None = None
    capacity_mc: float | None = None
    entropy_mc: float | None = None
    mc_stderr: float | None = None
    mc_steps: int | None = None
    ref_avg_capacity: float | None = None
    ref_avg_channel: float | None = None
    ref_low_noise_sub: float | None = None
    ref_noisier_sub: float | None = None
    ref_min_capacity: float | None = None


def _clamp_capacity(entropy: float) -> float:
    value = 1.0 - entropy
    if -1e-12 < value < 0.0:
        value = 0.0
    return value


def run_point(
    params: ChannelParams,
    knobs: SolverKnobs = SolverKnobs(),
    methods: Sequence[str] = ("blackwell",),
    *,
    mc_seed: int | None = None,
) -> ResultRow:
    """Evaluate one parameter point with every requested method."""
    row = ResultRow(
        s=params.s, a_bar=params.a_bar, d=params.d,
        q00=params.q00, x0_noerr=params.x0_noerr, x1_noerr=params.x1_noerr,
    )
    if "blackwell" in methods:
        est = bw.entropy_rate_blackwell(
            params,
            tol=knobs.tol, max_iter=knobs.max_iter,
            merge_tol=knobs.merge_tol, prune_tol=knobs.prune_tol,
            atom_budget=knobs.atom_budget,
        )
        row.entropy_blackwell = est.value
        row.capacity_blackwell = _clamp_capacity(est.value)
        row.blackwell_iterations = est.meta
        row.blackwell_delta = est.delta
    if "oracle_n" in methods or "monte_carlo" in methods:
        model = build_joint_chain(params)
        if "oracle_n" in methods:
            diff, ratio = entropy_rate_oracle(model, knobs.oracle_n)
            row.entropy_oracle_diff = diff.value
            row.entropy_oracle_ratio = ratio.value
            row.capacity_oracle = _clamp_capacity(diff.value)
            row.oracle_n = knobs.oracle_n
        if "monte_carlo" in methods:
            est = mc_entropy_rate(
                model, knobs.mc_steps,
                knobs.seed if mc_seed is None else mc_seed,
            )
            row.entropy_mc = est.value
            row.capacity_mc = _clamp_capacity(est.value)
            row.mc_stderr = est.stderr
            row.mc_steps = knobs.mc_steps
    if "references" in methods and params.has_physical:
        refs = reference_curves(params.a_bar, params.d)
        row.ref_avg_capacity = refs.avg_capacity
        row.ref_avg_channel = refs.avg_channel
        row.ref_low_noise_sub = refs.low_noise_sub
        row.ref_noisier_sub = refs.noisier_sub
        row.ref_min_capacity = refs.min_capacity
    return row


def _evaluate_task(task) -> tuple[int, ResultRow]:
    index, s, a, d, methods, knobs = task
    params = from_physical(s, a, d)
    row = run_point(params, knobs, methods, mc_seed=knobs.seed + index)
    return index, row


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.12g}"


def _axis_comment(name: str, axis: AxisSpec | None) -> str:
    if axis is None:
        return f"{name}=(policy)"
    return f"{name}={axis.start:.12g}:{axis.stop:.12g}:{axis.count}"


def write_csv(spec: SweepSpec, rows: Sequence[ResultRow], stream: IO[str]) -> None:
    """Emit the sweep as CSV: '#' knob comments, header, one row per point."""
    stream.write(
        "# memcap sweep: methods=" + ",".join(spec.methods)
        + f" d_policy={spec.d_policy}"
        + " " + _axis_comment("s", spec.s_axis)
        + " " + _axis_comment("a_bar", spec.a_axis)
        + " " + _axis_comment("d", spec.d_axis)
        + "\n"
    )
    stream.write(
        "# " + spec.knobs.describe() + " (per-row mc seed = seed + row index)\n"
    )
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(
            ",".join(_format_value(getattr(row, col)) for col in CSV_COLUMNS) + "\n"
        )


def run_sweep(spec: SweepSpec, stream: IO[str] | None = None) -> list[ResultRow]:
    """Evaluate a sweep grid in deterministic order, optionally writing CSV.

    All grid points are validated before any computation starts; a single
    invalid point aborts the sweep with the full list of offenders.
    Parallelism is controlled by the MEMCAP_THREADS environment variable
    (default 1); results are emitted in grid order regardless.
    """
    points = spec.grid()
    invalid = []
    for s, a, d in points:
        try:
            from_physical(s, a, d)
        except ParameterError as exc:
            invalid.append(f"(s={s:.12g}, a_bar={a:.12g}, d={d:.12g}): {exc}")
    if invalid:
        raise ParameterError(
            "invalid grid points:\n  " + "\n  ".join(invalid)
        )

    tasks = [
        (i, s, a, d, spec.methods, spec.knobs)
        for i, (s, a, d) in enumerate(points)
    ]
    workers = int(os.environ.get("MEMCAP_THREADS", "1") or "1")
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            indexed = list(pool.map(_evaluate_task, tasks, chunksize=1))
        indexed.sort(key=lambda item: item[0])
        rows = [row for _, row in indexed]
    else:
        rows = [_evaluate_task(task)[1] for task in tasks]

    if stream is not None:
        write_csv(spec, rows, stream)
    return rows


@dataclass(frozen=True)
class MethodComparison:
    """Pairwise agreement report between the capacity methods."""

    entropy_blackwell: float
    entropy_oracle: float
    entropy_mc: float
    mc_stderr: float
    oracle_n: int
    diff_oracle: float
    diff_mc: float
    cross_tol: float
    ok_oracle: bool
    ok_mc: bool

    @property
    def ok(self) -> bool:
        return self.ok_oracle and self.ok_mc

    def summary(self) -> str:
        lines = [
            f"entropy blackwell    = {self.entropy_blackwell:.12g}",
            f"entropy oracle(n={self.oracle_n}) = {self.entropy_oracle:.12g}",
            f"entropy monte-carlo  = {self.entropy_mc:.12g} +- {self.mc_stderr:.3g}",
            f"|blackwell - oracle| = {self.diff_oracle:.3e} "
            f"({'PASS' if self.ok_oracle else 'FAIL'} at {self.cross_tol:g})",
            f"|blackwell - mc|     = {self.diff_mc:.3e} "
            f"({'PASS' if self.ok_mc else 'FAIL'} at 3*stderr)",
        ]
        return "\n".join(lines)


def compare_methods(
    params: ChannelParams, knobs: SolverKnobs = SolverKnobs()
) -> MethodComparison:
    """Run all three entropy estimators on one point and grade agreement."""
    row = run_point(params, knobs, methods=("blackwell", "oracle_n", "monte_carlo"))
    diff_oracle = abs(row.entropy_blackwell - row.entropy_oracle_diff)
    diff_mc = abs(row.entropy_blackwell - row.entropy_mc)
    return MethodComparison(
        entropy_blackwell=row.entropy_blackwell,
        entropy_oracle=row.entropy_oracle_diff,
        entropy_mc=row.entropy_mc,
        mc_stderr=row.mc_stderr,
        oracle_n=knobs.oracle_n,
        diff_oracle=diff_oracle,
        diff_mc=diff_mc,
        cross_tol=knobs.cross_tol,
        ok_oracle=diff_oracle <= knobs.cross_tol,
        ok_mc=diff_mc <= 3.0 * row.mc_stderr,
    )


def preset_figure1() -> SweepSpec:
    """Capacity surface over (s, a_bar) at maximal sub-channel separation."""
    return SweepSpec(
        s_axis=AxisSpec(-0.95, 0.95, 39),
        a_axis=AxisSpec(1.0 / 3.0, 1.0, 27),
        d_policy="max_allowed",
        methods=("blackwell",),
    )


def preset_figure2() -> SweepSpec:
    """Capacity versus a_bar for the s = 2/3 slice, with reference curves."""
    return SweepSpec(
        s_axis=AxisSpec(2.0 / 3.0, 2.0 / 3.0, 1),
        a_axis=AxisSpec(0.5, 1.0, 26),
        d_policy="max_allowed",
        methods=("blackwell", "references"),
    )


def preset_figure3() -> SweepSpec:
    """Capacity versus s for the maximally separated a_bar = 2/3 family."""
    return SweepSpec(
        s_axis=AxisSpec(0.0, 0.99, 100),
        a_axis=AxisSpec(2.0 / 3.0, 2.0 / 3.0, 1),
        d_axis=AxisSpec(1.0 / 3.0, 1.0 / 3.0, 1),
        d_policy="explicit",
        methods=("blackwell", "monte_carlo", "references"),
        knobs=SolverKnobs(mc_steps=10**5),
    )


PRESETS = {
    "1": preset_figure1,
    "2": preset_figure2,
    "3": preset_figure3,
}
