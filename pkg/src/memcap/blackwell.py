"""Entropy rate of the error process via its invariant belief measure.

The predictive belief about which sub-channel is active lives on a line
segment parametrized by beta in [0, 1].  Observing a symbol updates the
belief through one of two rational shrink maps,

    f1(beta) = A(beta) x0^0 / c1(beta)   (symbol 0, weight c1)
    f2(beta) = A(beta) x0^1 / c2(beta)   (symbol 1, weight c2)

with A(beta) = beta q00 + (1-beta) q10, B = 1 - A, and symbol
probabilities c1 = A x0^0 + B x1^0, c2 = 1 - c1.  The pushforward
T[lambda](.) = c1 lambda[f1] + c2 lambda[f2] has a unique invariant
probability measure on [0, 1] (the Blackwell measure); integrating the
per-symbol surprisal against it gives the entropy rate

    S = integral  eta(c1(beta)) + eta(c2(beta))  d lambda(beta)

in bits, with eta(p) = -p log2 p.  The capacity of the channel is then
1 - S.

The measure is approximated by iterating T on a finitely supported
measure started from Dirac atoms at the fixed points of the two shrink
maps.  Each iteration doubles the atoms of the measure; atoms closer
than a merge tolerance are coalesced (weight-summed, positions
weight-averaged) and negligible weights are pruned, which keeps the
support finite while perturbing the entropy integral by far less than
the convergence tolerance.  When both maps stay active under strong
correlation the support outgrows any fixed merge tolerance, so the
convergence driver escalates the merge scale and snaps atoms to a fixed
lattice of that pitch (see entropy_rate_blackwell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    CP_WINDOW,
    ChannelParams,
    CPViolationError,
    FORGETFUL_MARGIN,
    NonForgetfulError,
    relabel,
)
from .oracle import EntropyEstimate

MERGE_TOL = 1e-12
PRUNE_TOL = 1e-15
ATOM_BUDGET = 2**22
TOL = 1e-10
MAX_ITER = 2000

# auto-coarsening never merges at a scale above this
MERGE_CEILING = 1e-4


class ConvergenceError(RuntimeError):
    """Entropy iteration failed to converge within max_iter."""

    def __init__(self, message: str, last_values: tuple[float, float]):
        super().__init__(message)
        self.last_values = last_values


class AtomBudgetError(RuntimeError):
    """Measure support outgrew the atom budget after merging and pruning."""


@dataclass(frozen=True)
class FilterSystem:
    """Closed-form belief-update maps of a channel and their fixed points.

    Branch i is inert when its weight function c_i vanishes identically
    (a symbol that can never occur); the corresponding shrink map is then
    undefined and its fixed point is None.
    """

    params: ChannelParams
    g: float            # A(beta) = g + h beta
    h: float
    x0_noerr: float
    x1_noerr: float
    a1: float | None
    a2: float | None
    branch1_active: bool
    branch2_active: bool

    def A(self, beta):
        return self._scalar_like(beta, self.g + self.h * np.asarray(beta, float))

    def B(self, beta):
        return self._scalar_like(beta, 1.0 - (self.g + self.h * np.asarray(beta, float)))

    def c1(self, beta):
        A = self.g + self.h * np.asarray(beta, float)
        return self._scalar_like(beta, A * self.x0_noerr + (1.0 - A) * self.x1_noerr)

    def c2(self, beta):
        A = self.g + self.h * np.asarray(beta, float)
        u1, w1 = 1.0 - self.x0_noerr, 1.0 - self.x1_noerr
        return self._scalar_like(beta, A * u1 + (1.0 - A) * w1)

    def f1(self, beta):
        A = self.g + self.h * np.asarray(beta, float)
        num = A * self.x0_noerr
        den = num + (1.0 - A) * self.x1_noerr
        out = np.divide(num, den, out=np.zeros_like(den), where=den > 0)
        return self._scalar_like(beta, out)

    def f2(self, beta):
        A = self.g + self.h * np.asarray(beta, float)
        num = A * (1.0 - self.x0_noerr)
        den = num + (1.0 - A) * (1.0 - self.x1_noerr)
        out = np.divide(num, den, out=np.zeros_like(den), where=den > 0)
        return self._scalar_like(beta, out)

    @staticmethod
    def _scalar_like(beta, value: np.ndarray):
        return value if np.ndim(value) else float(value)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported probability measure on the belief interval."""

    positions: np.ndarray   # sorted ascending, within [0, 1]
    weights: np.ndarray     # positive, summing to 1
    generation: int = 0

    def __post_init__(self):
        if self.positions.shape != self.weights.shape:
            raise ValueError("positions and weights must have equal length")
        if self.positions.size == 0:
            raise ValueError("measure needs at least one atom")
        if np.any(self.positions < 0.0) or np.any(self.positions > 1.0):
            raise ValueError("atom positions must lie in [0, 1]")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError("atom weights must sum to 1")
        self.positions.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self) -> int:
        return int(self.positions.size)


def _branch_fixed_point(g: float, h: float, num0: float, num1: float) -> float:
    """Fixed point in [0, 1] of beta -> A(beta) num0 / (A num0 + B num1).

    The fixed-point equation is the quadratic
        h (num0 - num1) b^2 + [num1 + g (num0 - num1) - h num0] b - g num0 = 0,
    degenerating to a linear equation for constant (h = 0) or affine
    (num0 = num1) maps.  When both roots land in [0, 1] the one stable
    under iteration (smaller |f'|) is selected.
    """
    qa = h * (num0 - num1)
    qb = num1 + g * (num0 - num1) - h * num0
    qc = -g * num0
    if qa == 0.0:
        # an active branch guarantees qb != 0 here
        return min(max(-qc / qb, 0.0), 1.0)
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        raise RuntimeError(
            f"no real fixed point (discriminant {disc!r}); "
            "parameters are outside the stochastic regime"
        )
    sq = math.sqrt(disc)
    qq = -0.5 * (qb + sq) if qb >= 0 else -0.5 * (qb - sq)
    roots = [qq / qa] if qq == 0.0 else [qq / qa, qc / qq]
    inside = [r for r in roots if -1e-12 <= r <= 1.0 + 1e-12]
    if not inside:
        raise RuntimeError(
            f"no fixed point in [0, 1] (roots {roots!r}); "
            "parameters are outside the stochastic regime"
        )
    if len(inside) > 1:
        def slope(r):
            c = num1 + (g + h * r) * (num0 - num1)
            return abs(h * num0 * num1) / (c * c) if c > 0 else math.inf
        inside.sort(key=lambda r: (slope(r), r))
    return min(max(inside[0], 0.0), 1.0)


def build_filter_system(params: ChannelParams) -> FilterSystem:
    """Derive the shrink maps, weight functions and fixed points."""
    g = params.q10
    h = params.q00 - params.q10
    u, w = params.x0_noerr, params.x1_noerr
    branch1 = max(u, w) > 0.0
    branch2 = max(1.0 - u, 1.0 - w) > 0.0
    a1 = _branch_fixed_point(g, h, u, w) if branch1 else None
    a2 = _branch_fixed_point(g, h, 1.0 - u, 1.0 - w) if branch2 else None
    return FilterSystem(
        params=params, g=g, h=h, x0_noerr=u, x1_noerr=w,
        a1=a1, a2=a2, branch1_active=branch1, branch2_active=branch2,
    )


def fixed_points(system: FilterSystem) -> tuple[float | None, float | None]:
    """Fixed points (a1, a2) of the shrink maps; None for an inert branch."""
    return system.a1, system.a2


def initial_measure(
    system: FilterSystem,
    *,
    weights: tuple[float, float] = (0.5, 0.5),
    merge_tol: float = MERGE_TOL,
) -> AtomicMeasure:
    """Starting measure: Dirac atoms at the shrink-map fixed points.

    weights are assigned to (a1, a2) in that order and renormalized; the
    converged entropy does not depend on them.  Coincident fixed points
    (or an inert branch) yield a single atom of weight 1.
    """
    atoms = []
    if system.a1 is not None:
        atoms.append((system.a1, weights[0]))
    if system.a2 is not None:
        atoms.append((system.a2, weights[1]))
    total = sum(wt for _, wt in atoms)
    if total <= 0:
        raise ValueError("initial weights must have a positive sum")
    atoms = [(pos, wt / total) for pos, wt in atoms if wt > 0]
    if len(atoms) == 2 and abs(atoms[0][0] - atoms[1][0]) < merge_tol:
        (p0, w0), (p1, w1) = atoms
        atoms = [(p0 * w0 + p1 * w1, 1.0)]
    atoms.sort()
    return AtomicMeasure(
        positions=np.array([pos for pos, _ in atoms]),
        weights=np.array([wt for _, wt in atoms]),
        generation=0,
    )


def _expand(
    system: FilterSystem, positions: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Push every atom through the active shrink maps (no coalescing)."""
    pos_parts, wt_parts = [], []
    if system.branch1_active:
        pos_parts.append(system.f1(positions))
        wt_parts.append(weights * system.c1(positions))
    if system.branch2_active:
        pos_parts.append(system.f2(positions))
        wt_parts.append(weights * system.c2(positions))
    pos = np.concatenate(pos_parts)
    wt = np.concatenate(wt_parts)
    live = wt > 0
    return pos[live], wt[live]


def _coalesce(
    pos: np.ndarray, wt: np.ndarray, merge_tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Sort atoms and merge runs closer than merge_tol (weight-averaged)."""
    order = np.argsort(pos, kind="stable")
    pos, wt = pos[order], wt[order]
    if merge_tol > 0 and pos.size > 1:
        starts = np.empty(pos.size, dtype=bool)
        starts[0] = True
        np.greater_equal(np.diff(pos), merge_tol, out=starts[1:])
        cluster = np.cumsum(starts) - 1
        wsum = np.bincount(cluster, weights=wt)
        psum = np.bincount(cluster, weights=wt * pos)
        return psum / wsum, wsum
    return pos, wt


def _prune(
    pos: np.ndarray, wt: np.ndarray, prune_tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Drop negligible atoms and renormalize the total weight to 1."""
    if prune_tol > 0:
        keep = wt >= prune_tol
        if keep.any() and not keep.all():
            pos, wt = pos[keep], wt[keep]
    return pos, wt / wt.sum()


def _lattice_merge(
    pos: np.ndarray, wt: np.ndarray, pitch: float
) -> tuple[np.ndarray, np.ndarray]:
    """Snap atoms onto a fixed lattice of the given pitch and sum weights.

    Unlike weight-averaged coalescing, the lattice sites do not drift
    between iterations, so the coarsened iteration is a finite linear
    system whose weights (and entropy) converge geometrically instead of
    jittering at the merge scale.
    """
    keys = np.round(pos / pitch)
    order = np.argsort(keys, kind="stable")
    keys, wt = keys[order], wt[order]
    starts = np.empty(keys.size, dtype=bool)
    starts[0] = True
    np.greater(np.diff(keys), 0, out=starts[1:])
    cluster = np.cumsum(starts) - 1
    wsum = np.bincount(cluster, weights=wt)
    centers = np.clip(keys[starts] * pitch, 0.0, 1.0)
    return centers, wsum


def iterate_measure(
    system: FilterSystem,
    measure: AtomicMeasure,
    *,
    merge_tol: float = MERGE_TOL,
    prune_tol: float = PRUNE_TOL,
    atom_budget: int = ATOM_BUDGET,
) -> AtomicMeasure:
    """One application of the transfer operator to an atomic measure.

    Every atom (beta, w) spawns (f1(beta), w c1(beta)) and
    (f2(beta), w c2(beta)); zero-weight branches are dropped, atoms
    within merge_tol are coalesced, weights below prune_tol are pruned
    and the result renormalized.  Raises AtomBudgetError when the merged
    support still exceeds atom_budget.
    """
    pos, wt = _expand(system, measure.positions, measure.weights)
    pos, wt = _coalesce(pos, wt, merge_tol)
    pos, wt = _prune(pos, wt, prune_tol)
    if pos.size > atom_budget:
        raise AtomBudgetError(
            f"{pos.size} atoms exceed the budget of {atom_budget}; "
            f"loosen merge_tol (currently {merge_tol:g}) or raise the budget"
        )
    return AtomicMeasure(
        positions=pos, weights=wt, generation=measure.generation + 1
    )


def entropy_functional(system: FilterSystem, measure: AtomicMeasure) -> float:
    """Mean per-symbol entropy of the measure, in bits.

    sum over atoms of w [eta(c1(beta)) + eta(c2(beta))], eta(0) = 0.
    """
    beta = measure.positions
    total = np.zeros_like(beta)
    for active, cfun in (
        (system.branch1_active, system.c1),
        (system.branch2_active, system.c2),
    ):
        if active:
            c = cfun(beta)
            mask = c > 0
            total[mask] -= c[mask] * np.log2(c[mask])
    return float(np.dot(measure.weights, total))


def _require_forgetful(params: ChannelParams) -> None:
    if (
        min(params.q00, params.q01, params.q10, params.q11) <= 0
        or abs(params.switch_eigenvalue) > 1.0 - FORGETFUL_MARGIN
    ):
        raise NonForgetfulError(
            "entropy iteration requires a forgetful switching chain "
            f"(second eigenvalue {params.switch_eigenvalue!r})"
        )


def entropy_rate_blackwell(
    params: ChannelParams,
    *,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    merge_tol: float = MERGE_TOL,
    prune_tol: float = PRUNE_TOL,
    atom_budget: int = ATOM_BUDGET,
    auto_coarsen: bool = True,
    init_weights: tuple[float, float] = (0.5, 0.5),
) -> EntropyEstimate:
    """Entropy rate by iterating the transfer operator to its fixed point.

    Starts from Dirac atoms at the shrink-map fixed points and iterates
    until the entropy functional moves by less than tol.  Convergence is
    declared on the functional, not on a measure metric: the entropy is
    the only consumed statistic.

    With auto_coarsen (default) the merge scale is raised tenfold, up to
    1e-4, whenever the support would outgrow a quarter of the atom
    budget; this caps memory for strongly correlated channels whose two
    shrink maps overlap, at a positional resolution still orders of
    magnitude below tol's effect on the integral.  In that coarsened
    regime atoms are snapped onto a fixed lattice of the escalated pitch
    (weight-averaged cluster centers would drift between iterations and
    leave the entropy jittering at the merge scale instead of
    converging).  With auto_coarsen=False the support may instead
    exhaust the budget, which raises AtomBudgetError.

    Channels with x0 < x1 are relabeled first, which leaves the observed
    error process unchanged and makes the result exactly symmetric under
    d -> -d.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    _require_forgetful(params)
    if params.x1_noerr > params.x0_noerr:
        params = relabel(params)
    system = build_filter_system(params)
    measure = initial_measure(system, weights=init_weights, merge_tol=merge_tol)
    s_prev = entropy_functional(system, measure)
    soft_cap = max(atom_budget // 4, 1)
    delta_merge = merge_tol
    prev_step = math.inf
    for iteration in range(1, max_iter + 1):
        pos, wt = _expand(system, measure.positions, measure.weights)
        if delta_merge > merge_tol:
            pos, wt = _lattice_merge(pos, wt, delta_merge)
        else:
            pos, wt = _coalesce(pos, wt, delta_merge)
        if auto_coarsen:
            while pos.size > soft_cap and delta_merge < MERGE_CEILING:
                delta_merge = min(delta_merge * 10.0, MERGE_CEILING)
                pos, wt = _lattice_merge(pos, wt, delta_merge)
        pos, wt = _prune(pos, wt, prune_tol)
        if pos.size > atom_budget:
            raise AtomBudgetError(
                f"{pos.size} atoms exceed the budget of {atom_budget}; "
                f"loosen merge_tol (currently {delta_merge:g})"
            )
        measure = AtomicMeasure(
            positions=pos, weights=wt, generation=measure.generation + 1
        )
        s_now = entropy_functional(system, measure)
        step = abs(s_now - s_prev)
        # oscillating sequences (s < 0) can dip below tol once while still
        # far from the limit; require two consecutive sub-tol steps unless
        # the functional is exactly stationary
        if step < tol and (step == 0.0 or prev_step < tol):
            return EntropyEstimate(
                value=s_now, method="blackwell", meta=iteration, delta=step
            )
        prev_step = step
        s_prev = s_now
    raise ConvergenceError(
        f"entropy iteration did not converge within {max_iter} iterations "
        f"(last values {s_prev!r}, {s_now!r}, step {step:g}, tol {tol:g})",
        last_values=(s_prev, s_now),
    )


def capacity(
    params: ChannelParams,
    *,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    merge_tol: float = MERGE_TOL,
    prune_tol: float = PRUNE_TOL,
    atom_budget: int = ATOM_BUDGET,
    auto_coarsen: bool = True,
) -> float:
    """Classical product-state capacity, 1 - entropy rate, in bits per use.

    Refuses parameters outside the complete-positivity window even when
    they were built with relax_cp: capacities are only reported for
    physical channels.
    """
    lo, hi = CP_WINDOW
    for label, value in (("x0_noerr", params.x0_noerr), ("x1_noerr", params.x1_noerr)):
        if not lo <= value <= hi:
            raise CPViolationError(
                f"capacity refused: {label} = {value!r} outside the "
                f"complete-positivity window [1/3, 1]"
            )
    est = entropy_rate_blackwell(
        params,
        tol=tol,
        max_iter=max_iter,
        merge_tol=merge_tol,
        prune_tol=prune_tol,
        atom_budget=atom_budget,
        auto_coarsen=auto_coarsen,
    )
    value = 1.0 - est.value
    if -1e-12 < value < 0.0:
        value = 0.0
    return value
