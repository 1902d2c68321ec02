"""Word probabilities, block entropies and the Monte-Carlo estimator."""

import math

import numpy as np
import pytest

from conftest import H2_23
from memcap import (
    ChannelParams,
    NonForgetfulError,
    binary_entropy,
    block_entropy,
    block_entropy_profile,
    build_joint_chain,
    entropy_rate_oracle,
    enumerate_words,
    from_physical,
    from_raw,
    mc_entropy_rate,
    parse_word,
    word_probability,
    word_probability_pathsum,
)

# block-difference oracle value at n = 16 for (s, a_bar, d) = (2/3, 2/3, 1/3),
# pinned from this module's own output as a regression anchor
ORACLE16_CORRELATED = 0.8161718154025888


def model_for(s, a, d, **kw):
    return build_joint_chain(from_physical(s, a, d, **kw))


def test_empty_word_probability_is_one():
    assert word_probability(model_for(0.4, 0.6, 0.1), "") == pytest.approx(1.0, abs=1e-15)
    assert word_probability_pathsum(model_for(0.4, 0.6, 0.1), ()) == 1.0


def test_single_symbol_probability():
    model = model_for(0, 2 / 3, 1 / 3)
    assert word_probability(model, "0") == pytest.approx(2 / 3, abs=1e-15)
    assert word_probability(model, [1]) == pytest.approx(1 / 3, abs=1e-15)


def test_two_symbol_probability_closed_form():
    # p(00) = (4 + s) / 9 on the maximally separated a_bar = 2/3 family
    model = model_for(2 / 3, 2 / 3, 1 / 3)
    assert word_probability(model, "00") == pytest.approx(14 / 27, abs=1e-15)
    assert word_probability_pathsum(model, "00") == pytest.approx(14 / 27, abs=1e-12)


def test_parse_word_rejects_non_binary():
    assert parse_word("0110") == (0, 1, 1, 0)
    assert parse_word([1, 0]) == (1, 0)
    with pytest.raises(ValueError):
        parse_word("012")


def test_pathsum_matches_matrix_product(param_grid):
    rng = np.random.default_rng(11)
    for p in param_grid[:6]:
        model = build_joint_chain(p)
        for _ in range(8):
            n = int(rng.integers(1, 11))
            word = rng.integers(0, 2, size=n)
            assert word_probability(model, word) == pytest.approx(
                word_probability_pathsum(model, word), abs=1e-12
            )


def test_pathsum_length_cap():
    with pytest.raises(ValueError):
        word_probability_pathsum(model_for(0.2, 0.6, 0.1), [0] * 21)


def test_probabilities_normalize():
    model = model_for(0.6, 0.55, 0.15)
    for n in (3, 12):
        total = math.fsum(
            word_probability(model, word) for word in enumerate_words(n)
        )
        assert total == pytest.approx(1.0, abs=1e-10)


def test_translation_consistency(param_grid):
    rng = np.random.default_rng(12)
    for p in param_grid[:4]:
        model = build_joint_chain(p)
        for _ in range(6):
            word = tuple(rng.integers(0, 2, size=int(rng.integers(0, 11))))
            pw = word_probability(model, word)
            assert pw == pytest.approx(
                sum(word_probability(model, word + (k,)) for k in (0, 1)), abs=1e-12
            )
            assert pw == pytest.approx(
                sum(word_probability(model, (k,) + word) for k in (0, 1)), abs=1e-12
            )


def test_block_entropy_memoryless():
    model = model_for(0, 2 / 3, 1 / 3)
    assert block_entropy(model, 1) == pytest.approx(H2_23, abs=1e-12)
    # s = 0 makes the error symbols i.i.d.
    assert block_entropy(model, 10) == pytest.approx(10 * H2_23, abs=1e-10)
    other = model_for(0, 0.8, 0.1)
    assert block_entropy(other, 8) == pytest.approx(8 * binary_entropy(0.8), abs=1e-10)


def test_block_entropy_bounds_and_range(param_grid):
    for p in param_grid[:5]:
        model = build_joint_chain(p)
        s8 = block_entropy(model, 8)
        assert 0.0 <= s8 <= 8.0 + 1e-12
    with pytest.raises(ValueError):
        block_entropy(model, 0)
    with pytest.raises(ValueError):
        block_entropy(model, 25)


def test_block_profile_monotone_with_concave_increments():
    model = model_for(0.6, 0.55, 0.55 - 1 / 3)
    S = block_entropy_profile(model, 16)
    increments = np.diff(np.concatenate(([0.0], S)))
    assert np.all(np.diff(S) > 0)
    assert np.all(np.diff(increments) <= 1e-12)


def test_entropy_rate_oracle_iid_cases():
    diff, ratio = entropy_rate_oracle(model_for(0, 2 / 3, 1 / 3), 10)
    assert diff.value == pytest.approx(H2_23, abs=1e-12)
    assert ratio.value == pytest.approx(H2_23, abs=1e-12)
    assert diff.method == "block_difference" and ratio.method == "block_ratio"

    # identical sub-channels make errors i.i.d. regardless of switching
    diff, ratio = entropy_rate_oracle(model_for(0.5, 0.8, 0), 10)
    assert diff.value == pytest.approx(binary_entropy(0.8), abs=1e-12)
    assert ratio.value == pytest.approx(binary_entropy(0.8), abs=1e-12)


def test_entropy_rate_oracle_regression_and_ordering(param_grid):
    diff, ratio = entropy_rate_oracle(model_for(2 / 3, 2 / 3, 1 / 3), 16)
    assert diff.value == pytest.approx(ORACLE16_CORRELATED, abs=1e-10)
    for p in param_grid[:6]:
        d, r = entropy_rate_oracle(build_joint_chain(p), 12)
        assert d.value <= r.value + 1e-12
    with pytest.raises(ValueError):
        entropy_rate_oracle(build_joint_chain(param_grid[0]), 1)


def test_symbol_flip_leaves_entropy_unchanged():
    p = from_physical(0.6, 2 / 3, 1 / 3)
    flipped = from_raw(p.q, 1.0 - p.x0_noerr, 1.0 - p.x1_noerr, relax_cp=True)
    S = block_entropy_profile(build_joint_chain(p), 10)
    S_flip = block_entropy_profile(build_joint_chain(flipped), 10)
    assert S == pytest.approx(S_flip, abs=1e-12)


def test_mc_matches_iid_references():
    est = mc_entropy_rate(model_for(0, 2 / 3, 1 / 3), 200_000, seed=7)
    assert est.stderr is not None and 0 < est.stderr < 0.01
    assert abs(est.value - H2_23) <= 3 * est.stderr

    est = mc_entropy_rate(model_for(0.5, 0.8, 0), 200_000, seed=7)
    assert abs(est.value - binary_entropy(0.8)) <= 3 * est.stderr


def test_mc_is_deterministic_per_seed():
    model = model_for(0.6, 0.55, 0.15)
    a = mc_entropy_rate(model, 50_000, seed=99)
    b = mc_entropy_rate(model, 50_000, seed=99)
    c = mc_entropy_rate(model, 50_000, seed=100)
    assert a.value == b.value and a.stderr == b.stderr
    assert a.value != c.value


def test_mc_preconditions():
    model = model_for(0.3, 0.6, 0.1)
    with pytest.raises(ValueError):
        mc_entropy_rate(model, 0, seed=1)
    # a reducible chain has no stationary switching distribution
    frozen = ChannelParams(q00=1.0, q01=0.0, q10=0.0, q11=1.0,
                           x0_noerr=1.0, x1_noerr=1 / 3)
    with pytest.raises(NonForgetfulError):
        build_joint_chain(frozen)
    # a barely-mixing chain builds, but the estimator refuses it
    eps = 1e-10
    near = ChannelParams(q00=1 - eps, q01=eps, q10=eps, q11=1 - eps,
                         x0_noerr=1.0, x1_noerr=1 / 3)
    with pytest.raises(NonForgetfulError):
        mc_entropy_rate(build_joint_chain(near), 10, seed=1)
