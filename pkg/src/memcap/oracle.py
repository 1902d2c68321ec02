"""Exact and stochastic reference computations for the error process.

Ground truth against which the Blackwell iteration is validated:

  * word probabilities p(k_1 .. k_n) = <tau| F_{k_1} .. F_{k_n} |1>,
    cross-checked by a direct sum over sub-channel paths,
  * exact block entropies S_n by depth-first traversal of the word tree,
  * entropy-rate estimates S_n - S_{n-1} and S_n / n,
  * a seeded Monte-Carlo estimator that averages the filter surprisal
    -log2 p(symbol | past) along a simulated error sequence.

All entropies are in bits.  The convention 0 * log 0 = 0 applies
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .channel import JointChainModel, NonForgetfulError, FORGETFUL_MARGIN

# explicit path enumeration is exponential; hard cap on the word length
PATHSUM_MAX = 20

# default ceiling for block-entropy computations (time O(2^n), memory O(n))
BLOCK_N_MAX = 24

# depth of the vectorized tail of the prefix-tree traversal
CHUNK_DEPTH = 14

Word = Sequence[int] | str


@dataclass(frozen=True)
class EntropyEstimate:
    """An entropy-rate value in bits per channel use.

    method is one of block_ratio, block_difference, blackwell,
    monte_carlo; meta carries the blocklength, iteration count or step
    count; delta the last convergence increment; stderr is set by the
    Monte-Carlo estimator only.
    """

    value: float
    method: str
    meta: int
    delta: float
    stderr: float | None = None


def parse_word(word: Word) -> tuple[int, ...]:
    """Normalize a word over {0, 1} given as a string or int sequence."""
    if isinstance(word, str):
        symbols = tuple(int(ch) for ch in word)
    else:
        symbols = tuple(int(k) for k in word)
    if any(k not in (0, 1) for k in symbols):
        raise ValueError(f"word must be over {{0, 1}}, got {word!r}")
    return symbols


def word_probability(model: JointChainModel, word: Word) -> float:
    """p(word) = <tau| F_{k_1} .. F_{k_n} |1>; the empty word has p = 1."""
    symbols = parse_word(word)
    F = (model.F0, model.F1)
    v = model.tau
    for k in symbols:
        v = v @ F[k]
    return float(v.sum())


def word_probability_pathsum(model: JointChainModel, word: Word) -> float:
    """p(word) by direct summation over all sub-channel paths.

    Independent of the matrix-product route: enumerates the 2^n paths
    (i_1 .. i_n) and sums gamma_{i_1} q_{i_1 i_2} .. q_{i_{n-1} i_n}
    x_{i_1}^{k_1} .. x_{i_n}^{k_n}.
    """
    symbols = parse_word(word)
    n = len(symbols)
    if n > PATHSUM_MAX:
        raise ValueError(
            f"path enumeration capped at length {PATHSUM_MAX}, got {n}"
        )
    if n == 0:
        return 1.0
    p = model.params
    qa = ((p.q00, p.q01), (p.q10, p.q11))
    x = ((p.x0_noerr, 1.0 - p.x0_noerr), (p.x1_noerr, 1.0 - p.x1_noerr))
    gamma = model.gamma
    terms = []
    for path in product((0, 1), repeat=n):
        t = gamma[path[0]] * x[path[0]][symbols[0]]
        for m in range(1, n):
            t *= qa[path[m - 1]][path[m]] * x[path[m]][symbols[m]]
        terms.append(t)
    return math.fsum(terms)


def _eta_sum(p: np.ndarray) -> float:
    """Sum of -p log2 p over an array, with 0 log 0 = 0 (pairwise summation)."""
    p = p[p > 0]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log2(p)))


def block_entropy_profile(
    model: JointChainModel, n: int, *, chunk_depth: int = CHUNK_DEPTH
) -> np.ndarray:
    """Exact block entropies S_1 .. S_n in bits, as an array of length n.

    Depth-first traversal of the binary prefix tree carrying the row
    vector tau^T F_{k_1} .. F_{k_m}.  The top of the tree is walked one
    prefix at a time; the last `chunk_depth` levels are expanded as a
    doubling array so the per-word work is vectorized.  Memory stays
    O(n + 2^chunk_depth); zero-probability subtrees are pruned (they
    contribute nothing under 0 log 0 = 0).  Per-level totals are
    accumulated with exact summation, so the result is deterministic.
    """
    if n < 1:
        raise ValueError(f"blocklength must be >= 1, got {n}")
    F = (model.F0, model.F1)
    split = max(0, n - chunk_depth)
    per_level: list[list[float]] = [[] for _ in range(n + 1)]

    def expand_chunk(v: np.ndarray, depth: int) -> None:
        V = v.reshape(1, 4)
        for m in range(depth + 1, n + 1):
            V = np.vstack((V @ F[0], V @ F[1]))
            probs = V.sum(axis=1)
            per_level[m].append(_eta_sum(probs))
            live = probs > 0
            if not live.all():
                V = V[live]

    def dfs(v: np.ndarray, depth: int) -> None:
        if depth == split:
            expand_chunk(v, depth)
            return
        for k in (0, 1):
            w = v @ F[k]
            pw = float(w.sum())
            if pw > 0:
                per_level[depth + 1].append(-pw * math.log2(pw))
                dfs(w, depth + 1)

    dfs(model.tau, 0)
    return np.array([math.fsum(per_level[m]) for m in range(1, n + 1)])


def block_entropy(
    model: JointChainModel,
    n: int,
    *,
    n_max: int = BLOCK_N_MAX,
    chunk_depth: int = CHUNK_DEPTH,
) -> float:
    """S_n in bits; 0 <= S_n <= n for the binary error alphabet."""
    if not 1 <= n <= n_max:
        raise ValueError(f"blocklength must be in [1, {n_max}], got {n}")
    return float(block_entropy_profile(model, n, chunk_depth=chunk_depth)[-1])


def entropy_rate_oracle(
    model: JointChainModel,
    n: int,
    *,
    n_max: int = BLOCK_N_MAX,
    chunk_depth: int = CHUNK_DEPTH,
) -> tuple[EntropyEstimate, EntropyEstimate]:
    """Block-entropy estimates of the entropy rate at blocklength n.

    Returns (difference, ratio): the block-difference estimate
    S_n - S_{n-1} and the block-ratio estimate S_n / n.  Both converge to
    the entropy rate from above, and difference <= ratio for a stationary
    process.  The delta fields record how much each estimate moved in the
    last blocklength step.
    """
    if not 2 <= n <= n_max:
        raise ValueError(f"blocklength must be in [2, {n_max}], got {n}")
    S = block_entropy_profile(model, n, chunk_depth=chunk_depth)
    prev2 = S[n - 3] if n >= 3 else 0.0
    diff = EntropyEstimate(
        value=float(S[n - 1] - S[n - 2]),
        method="block_difference",
        meta=n,
        delta=abs(float((S[n - 1] - S[n - 2]) - (S[n - 2] - prev2))),
    )
    ratio = EntropyEstimate(
        value=float(S[n - 1] / n),
        method="block_ratio",
        meta=n,
        delta=abs(float(S[n - 1] / n - S[n - 2] / (n - 1))),
    )
    return diff, ratio


def mc_entropy_rate(
    model: JointChainModel,
    steps: int,
    seed: int,
    *,
    batches: int = 100,
) -> EntropyEstimate:
    """Monte-Carlo entropy-rate estimate from a simulated error sequence.

    Simulates the joint chain from its stationary distribution, emits the
    error symbols, and tracks the exact predictive belief with the
    one-dimensional filter maps (variance reduction: the surprisal
    -log2 p(symbol | past) uses the exact conditional probability, not
    empirical counts).  The standard error comes from batch means over
    `batches` consecutive blocks.  Reproducible for a fixed seed.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    p = model.params
    if (
        min(p.q00, p.q01, p.q10, p.q11) <= 0
        or abs(p.switch_eigenvalue) > 1.0 - FORGETFUL_MARGIN
    ):
        raise NonForgetfulError(
            "Monte-Carlo estimator requires a forgetful switching chain"
        )
    q00, q10 = p.q00, p.q10
    u, w = p.x0_noerr, p.x1_noerr
    g, h = q10, q00 - q10
    gamma0 = float(model.gamma[0])

    rng = np.random.default_rng(seed)
    u_chan = rng.random(steps)
    u_err = rng.random(steps)
    surprisal = np.empty(steps)

    log2 = math.log2
    beta = gamma0  # stationary belief: the chain starts from tau
    chan = 0
    for t in range(steps):
        if t == 0:
            chan = 0 if u_chan[0] < gamma0 else 1
        else:
            chan = 0 if u_chan[t] < (q00 if chan == 0 else q10) else 1
        x_no = u if chan == 0 else w
        A = g + h * beta
        c1 = A * u + (1.0 - A) * w
        if u_err[t] < x_no:  # no error observed
            surprisal[t] = -log2(c1)
            beta = A * u / c1
        else:
            c2 = 1.0 - c1
            surprisal[t] = -log2(c2)
            beta = A * (1.0 - u) / c2

    value = float(surprisal.mean())
    nb = min(batches, steps)
    if nb >= 2:
        bs = steps // nb
        means = surprisal[: nb * bs].reshape(nb, bs).mean(axis=1)
        stderr = float(means.std(ddof=1) / math.sqrt(nb))
    else:
        stderr = float("nan")
    return EntropyEstimate(
        value=value, method="monte_carlo", meta=steps, delta=0.0, stderr=stderr
    )


def enumerate_words(n: int) -> Iterable[tuple[int, ...]]:
    """All words of length n over {0, 1}, in lexicographic order."""
    return product((0, 1), repeat=n)
