"""Switched depolarizing channel model.

A qubit channel built from two depolarizing sub-channels selected by a
two-state Markov chain.  Sub-channel i keeps a qubit intact with
probability x_i^0 and flips it with probability x_i^1 = 1 - x_i^0; the
switching chain q decides which sub-channel acts on each use.  The error
sequence seen at the output is a function of the joint 4-state
(sub-channel, error) Markov chain, which this module constructs
explicitly: transition matrix E, the per-symbol observation matrices
F0/F1, and the stationary vectors gamma (switching chain) and tau (joint
chain).

Everything downstream depends only on (q, x); no encoded input state
enters any computation.  State order for all 4x4 matrices is
(0,0), (0,1), (1,0), (1,1) with the first index the sub-channel and the
second the error bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# sub-channel maps are completely positive only on this window
CP_WINDOW = (1.0 / 3.0, 1.0)

# |second eigenvalue of q| must stay below 1 by at least this margin
FORGETFUL_MARGIN = 1e-9

# validate() flags chains this close to the non-forgetful limit
NEAR_FORGETFUL_WARN = 1e-5

STATE_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))


class ParameterError(ValueError):
    """Invalid channel parameters."""


class CPViolationError(ParameterError):
    """A no-error probability lies outside the complete-positivity window."""


class NonForgetfulError(ParameterError):
    """The switching chain is not (safely) aperiodic and irreducible."""


@dataclass(frozen=True)
class ChannelParams:
    """Raw and (optionally) physical parameters of the switched channel.

    The physical view (s, a_bar, d) exists only when the switching matrix
    is doubly stochastic: q00 = (1+s)/2, q10 = (1-s)/2, x0 = a_bar + d,
    x1 = a_bar - d.  Instances are immutable; build them through
    `from_physical` / `from_raw`, which enforce the invariants.  Directly
    constructed instances are unchecked (see `validate`).
    """

    q00: float
    q01: float
    q10: float
    q11: float
    x0_noerr: float
    x1_noerr: float
    s: float | None = None
    a_bar: float | None = None
    d: float | None = None
    relax_cp: bool = False

    @property
    def q(self) -> np.ndarray:
        """Switching matrix as a 2x2 array."""
        return np.array([[self.q00, self.q01], [self.q10, self.q11]])

    @property
    def switch_eigenvalue(self) -> float:
        """Second eigenvalue of q (equals s when doubly stochastic)."""
        return self.q00 + self.q11 - 1.0

    @property
    def has_physical(self) -> bool:
        return self.s is not None

    def as_record(self) -> dict:
        """Flat key-value view used for CSV serialization."""
        return {
            "s": self.s,
            "a_bar": self.a_bar,
            "d": self.d,
            "q00": self.q00,
            "q10": self.q10,
            "x0_noerr": self.x0_noerr,
            "x1_noerr": self.x1_noerr,
        }


@dataclass(frozen=True)
class JointChainModel:
    """Joint (sub-channel, error) chain and its observation matrices.

    E[(i,j),(i',j')] = q_{ii'} x_{i'}^{j'}; F_a keeps the rows of E whose
    error component equals a, so F0 + F1 = E.  tau is the stationary
    distribution of E, gamma the stationary distribution of q, and `ones`
    the all-ones right vector.
    """

    params: ChannelParams
    E: np.ndarray
    F0: np.ndarray
    F1: np.ndarray
    gamma: np.ndarray
    tau: np.ndarray
    ones: np.ndarray = field(default_factory=lambda: np.ones(4))

    def __post_init__(self):
        for arr in (self.E, self.F0, self.F1, self.gamma, self.tau, self.ones):
            arr.flags.writeable = False


def _check_noerr(label: str, value: float, relax_cp: bool) -> None:
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{label} = {value!r} is not a probability")
    lo, hi = CP_WINDOW
    if not relax_cp and not lo <= value <= hi:
        raise CPViolationError(
            f"{label} = {value!r} outside the complete-positivity window "
            f"[1/3, 1]"
        )


def from_physical(
    s: float,
    a_bar: float,
    d: float,
    *,
    relax_cp: bool = False,
    forgetful_margin: float = FORGETFUL_MARGIN,
) -> ChannelParams:
    """Build parameters from the symmetric-switching view (s, a_bar, d).

    s is the second eigenvalue of the doubly stochastic switching matrix,
    a_bar the average no-error probability of the two sub-channels and d
    half their difference.
    """
    if abs(s) > 1.0 - forgetful_margin:
        raise NonForgetfulError(
            f"|s| = {abs(s)!r} too close to 1; the switching chain must be "
            f"aperiodic and irreducible (|s| <= 1 - {forgetful_margin:g})"
        )
    x0 = a_bar + d
    x1 = a_bar - d
    _check_noerr("x0_noerr", x0, relax_cp)
    _check_noerr("x1_noerr", x1, relax_cp)
    # mirrored expressions keep q bitwise doubly stochastic, which makes
    # sub-channel relabeling (d -> -d) an exact symmetry of every result
    q00 = (1.0 + s) / 2.0
    q10 = (1.0 - s) / 2.0
    return ChannelParams(
        q00=q00, q01=q10, q10=q10, q11=q00,
        x0_noerr=x0, x1_noerr=x1,
        s=s, a_bar=a_bar, d=d, relax_cp=relax_cp,
    )


def from_raw(
    q,
    x0_noerr: float,
    x1_noerr: float,
    *,
    relax_cp: bool = False,
    forgetful_margin: float = FORGETFUL_MARGIN,
) -> ChannelParams:
    """Build parameters from an explicit switching matrix and x values.

    q need not be doubly stochastic; the physical (s, a_bar, d) view is
    populated only when it is.
    """
    qa = np.asarray(q, dtype=float)
    if qa.shape != (2, 2):
        raise ParameterError(f"q must be 2x2, got shape {qa.shape}")
    for i in (0, 1):
        if abs(qa[i, 0] + qa[i, 1] - 1.0) > 1e-12:
            raise ParameterError(
                f"q row {i} not stochastic: sums to {qa[i, 0] + qa[i, 1]!r}"
            )
    if np.any(qa < 0):
        raise ParameterError("q entries must be non-negative")
    eig = qa[0, 0] + qa[1, 1] - 1.0
    if np.any(qa <= 0) or abs(eig) > 1.0 - forgetful_margin:
        raise NonForgetfulError(
            "switching chain is not safely aperiodic and irreducible: "
            f"q = {qa.tolist()} (second eigenvalue {eig!r})"
        )
    _check_noerr("x0_noerr", x0_noerr, relax_cp)
    _check_noerr("x1_noerr", x1_noerr, relax_cp)

    doubly_stochastic = abs(qa[0, 0] - qa[1, 1]) <= 1e-12
    if doubly_stochastic:
        s = qa[0, 0] - qa[1, 0]
        a_bar = (x0_noerr + x1_noerr) / 2.0
        d = (x0_noerr - x1_noerr) / 2.0
    else:
        s = a_bar = d = None
    return ChannelParams(
        q00=float(qa[0, 0]), q01=float(qa[0, 1]),
        q10=float(qa[1, 0]), q11=float(qa[1, 1]),
        x0_noerr=x0_noerr, x1_noerr=x1_noerr,
        s=s, a_bar=a_bar, d=d, relax_cp=relax_cp,
    )


def to_physical(params: ChannelParams) -> tuple[float, float, float]:
    """Return (s, a_bar, d); raises when the physical view is unavailable."""
    if not params.has_physical:
        raise ParameterError(
            "physical view unavailable: switching matrix is not doubly "
            "stochastic"
        )
    return params.s, params.a_bar, params.d


def relabel(params: ChannelParams) -> ChannelParams:
    """Swap the labels of the two sub-channels.

    Maps (s, a_bar, d) to (s, a_bar, -d) on the physical view and permutes
    the joint chain by (0,0)<->(1,0), (0,1)<->(1,1).  The observed error
    process is unchanged.
    """
    return ChannelParams(
        q00=params.q11, q01=params.q10, q10=params.q01, q11=params.q00,
        x0_noerr=params.x1_noerr, x1_noerr=params.x0_noerr,
        s=params.s, a_bar=params.a_bar,
        d=(-params.d if params.d is not None else None),
        relax_cp=params.relax_cp,
    )


def stationary_switch_distribution(params: ChannelParams) -> np.ndarray:
    """Stationary distribution gamma of the switching chain, q^T gamma = gamma.

    Closed form for two states: gamma_0 = q10 / (q01 + q10).
    """
    denom = params.q01 + params.q10
    if denom <= 0:
        raise NonForgetfulError("switching chain is reducible (q01 = q10 = 0)")
    g0 = params.q10 / denom
    return np.array([g0, 1.0 - g0])


def build_joint_chain(params: ChannelParams) -> JointChainModel:
    """Construct the 4-state joint chain (E, F0, F1, gamma, tau)."""
    x = np.array([
        [params.x0_noerr, 1.0 - params.x0_noerr],
        [params.x1_noerr, 1.0 - params.x1_noerr],
    ])
    qa = params.q
    E = np.empty((4, 4))
    for r, (i, _j) in enumerate(STATE_ORDER):
        for c, (i2, j2) in enumerate(STATE_ORDER):
            E[r, c] = qa[i, i2] * x[i2, j2]
    # F_a keeps the rows whose error component is a
    F0 = E.copy()
    F0[1] = 0.0
    F0[3] = 0.0
    F1 = E.copy()
    F1[0] = 0.0
    F1[2] = 0.0
    gamma = stationary_switch_distribution(params)
    tau = np.array([gamma[i] * x[i, j] for (i, j) in STATE_ORDER])
    return JointChainModel(params=params, E=E, F0=F0, F1=F1, gamma=gamma, tau=tau)


def stationary_joint_distribution(model: JointChainModel) -> np.ndarray:
    """Stationary distribution of E, tau_(i,k) = gamma_i x_i^k."""
    return model.tau


@dataclass(frozen=True)
class Diagnostics:
    """Result of `validate`: hard violations plus advisory warnings."""

    violations: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(params: ChannelParams) -> Diagnostics:
    """Report every violated invariant of a parameter set (reporting only).

    Unlike the factory functions this never raises, so it can grade
    hand-built instances, including non-forgetful or CP-violating ones.
    """
    violations: list[str] = []
    warnings: list[str] = []

    for i, (a, b) in enumerate(((params.q00, params.q01), (params.q10, params.q11))):
        if abs(a + b - 1.0) > 1e-12:
            violations.append(f"q row {i} not stochastic (sum = {a + b!r})")
        if a < 0 or b < 0:
            violations.append(f"q row {i} has a negative entry")

    eig = params.switch_eigenvalue
    qmin = min(params.q00, params.q01, params.q10, params.q11)
    if qmin <= 0 or abs(eig) > 1.0 - FORGETFUL_MARGIN:
        violations.append(
            f"non-forgetful switching chain (second eigenvalue {eig!r})"
        )
    elif abs(eig) >= 1.0 - NEAR_FORGETFUL_WARN:
        warnings.append(
            f"near non-forgetful switching chain (second eigenvalue {eig!r})"
        )

    lo, hi = CP_WINDOW
    for label, value in (("x0_noerr", params.x0_noerr), ("x1_noerr", params.x1_noerr)):
        if not 0.0 <= value <= 1.0:
            violations.append(f"{label} = {value!r} is not a probability")
        elif not lo <= value <= hi:
            msg = f"{label} = {value!r} outside the CP window [1/3, 1]"
            if params.relax_cp:
                warnings.append(msg + " (relax_cp set)")
            else:
                violations.append(msg)

    if params.has_physical:
        checks = (
            ("q00", params.q00, (1.0 + params.s) / 2.0),
            ("q10", params.q10, (1.0 - params.s) / 2.0),
            ("x0_noerr", params.x0_noerr, params.a_bar + params.d),
            ("x1_noerr", params.x1_noerr, params.a_bar - params.d),
        )
        for label, raw, expected in checks:
            if abs(raw - expected) > 1e-12:
                violations.append(
                    f"physical view inconsistent: {label} = {raw!r}, "
                    f"expected {expected!r}"
                )

    return Diagnostics(violations=tuple(violations), warnings=tuple(warnings))
