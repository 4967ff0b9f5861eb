import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsub.errors import NoFlagQubit, NoSolutions
from qsub.oracle import (
    apply_uc,
    branch_amplitudes,
    grover_step,
    grover_success_closed_form,
    optimal_grover_iterations,
    phase_oracle,
    success_probability,
)
from qsub.predicate import enumerate_solutions, parse
from qsub.statevec import RegisterLayout, StateVector, basis_state, uniform_superposition

from corpus import CORPUS, brute_force


def random_state(layout, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector(layout, v / np.linalg.norm(v))


def post_oracle(text, k):
    return apply_uc(uniform_superposition(RegisterLayout(k, has_flag=True)), parse(text))


def test_uc_single_qubit():
    layout = RegisterLayout(1, has_flag=True)
    ast = parse("x = 0")
    # |x=0, y=0> -> |0, 1> and |1, 0> -> |1, 0>
    assert apply_uc(basis_state(layout, layout.index(0, 0)), ast).allclose(
        basis_state(layout, layout.index(0, 1))
    )
    assert apply_uc(basis_state(layout, layout.index(1, 0)), ast).allclose(
        basis_state(layout, layout.index(1, 0))
    )


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 8), z=st.booleans(), seed=st.integers(0, 10**6), idx=st.integers(0, len(CORPUS) - 1))
def test_uc_involution_and_norm(k, z, seed, idx):
    ast = parse(CORPUS[idx][0])
    layout = RegisterLayout(k, has_flag=True, z_width=k if z and k <= 5 else 0)
    s = random_state(layout, seed)
    once = apply_uc(s, ast)
    assert abs(once.norm() - s.norm()) < 1e-12
    assert np.array_equal(apply_uc(once, ast).amps, s.amps)


def test_uc_is_a_permutation_matching_the_predicate():
    text, k, fn = CORPUS[0]
    layout = RegisterLayout(k, has_flag=True)
    ast = parse(text)
    for x in range(1 << k):
        for y in (0, 1):
            out = apply_uc(basis_state(layout, layout.index(x, y)), ast)
            assert out.allclose(basis_state(layout, layout.index(x, y ^ int(fn(x)))))


def test_uc_needs_flag():
    with pytest.raises(NoFlagQubit):
        apply_uc(uniform_superposition(3), parse("x = 1"))


def test_uc_flag1_mass_one_in_eight():
    ba = branch_amplitudes(post_oracle("x*x - 4 = 0", 3))
    assert abs(ba.a**2 - 1 / 8) < 1e-12


def test_branch_amplitudes_examples():
    ba = branch_amplitudes(post_oracle("x = 1 or x = 3", 2))
    assert ba.a == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert ba.b == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    ba = branch_amplitudes(post_oracle("x = 9", 3))
    assert ba.a == 0 and ba.b == pytest.approx(1, abs=1e-12)

    ba = branch_amplitudes(post_oracle("x = 3 or x = 5 or x = 250", 8))
    # brute-force Born sum: three flag=1 basis states of amplitude 1/16 each
    assert abs(ba.a**2 - 3 * (1 / 16) ** 2) < 1e-12
    assert abs(ba.a**2 - 3 / 256) < 1e-12

    with pytest.raises(NoFlagQubit):
        branch_amplitudes(uniform_superposition(2))


@pytest.mark.parametrize("text,k,fn", CORPUS)
def test_uniform_branch_mass_is_n_over_2k(text, k, fn):
    n = len(brute_force(fn, k))
    ba = branch_amplitudes(post_oracle(text, k))
    assert abs(ba.a**2 - n / (1 << k)) < 1e-12
    assert abs(ba.a**2 + ba.b**2 - 1) < 1e-12


def test_post_oracle_state_matches_hand_construction():
    # |Q> = a sum |x_s>|1> + b sum |x_ns>|0>
    q = post_oracle("x^2 - 5*x + 6 = 0", 4)
    layout = q.layout
    expected = np.zeros(layout.dim)
    for x in range(16):
        expected[layout.index(x, 1 if x in (2, 3) else 0)] = 0.25
    assert np.max(np.abs(q.amps - expected)) < 1e-15


def test_phase_oracle_examples():
    ast = parse("x = 0")
    out = phase_oracle(uniform_superposition(1), ast)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(out.amps, [-r, r], atol=1e-15)
    assert np.array_equal(phase_oracle(out, ast).amps, uniform_superposition(1).amps)
    with pytest.raises(ValueError):
        phase_oracle(uniform_superposition(RegisterLayout(1, has_flag=True)), ast)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 10), seed=st.integers(0, 10**6), idx=st.integers(0, len(CORPUS) - 1))
def test_phase_oracle_and_grover_preserve_norm(k, seed, idx):
    ast = parse(CORPUS[idx][0])
    s = random_state(RegisterLayout(k), seed)
    assert abs(phase_oracle(s, ast).norm() - 1) < 1e-12
    assert abs(grover_step(s, ast).norm() - 1) < 1e-12


@pytest.mark.parametrize("text,k,fn", [c for c in CORPUS if c[1] <= 6])
def test_uc_phase_kickback_equals_phase_oracle(text, k, fn):
    # flag in |->: Uc multiplies |x>|-> by (-1)^f(x)
    ast = parse(text)
    s = random_state(RegisterLayout(k), k)
    minus = np.array([1, -1]) / math.sqrt(2)
    joint = StateVector(RegisterLayout(k, has_flag=True), np.kron(s.amps, minus))
    kicked = apply_uc(joint, ast)
    expected = np.kron(phase_oracle(s, ast).amps, minus)
    assert np.max(np.abs(kicked.amps - expected)) < 1e-12


def test_grover_k2_single_step_is_exact():
    ast = parse("x = 2")
    s = grover_step(uniform_superposition(2), ast)
    assert success_probability(s, ast) == pytest.approx(1.0, abs=1e-12)
    assert grover_success_closed_form(1, 2, 1) == pytest.approx(1.0, abs=1e-15)


def test_grover_k4_three_steps():
    ast = parse("x = 11")
    s = uniform_superposition(4)
    for _ in range(3):
        s = grover_step(s, ast)
    p = success_probability(s, ast)
    assert p == pytest.approx(math.sin(7 * math.asin(0.25)) ** 2, abs=1e-9)
    assert p == pytest.approx(0.9613, abs=5e-5)


@pytest.mark.parametrize("text,k,fn", CORPUS)
def test_zero_steps_gives_n_over_2k(text, k, fn):
    n = len(brute_force(fn, k))
    assert success_probability(uniform_superposition(k), parse(text)) == pytest.approx(n / (1 << k), abs=1e-12)


def test_optimal_iterations():
    assert optimal_grover_iterations(1, 4) == 3
    assert optimal_grover_iterations(1, 2) == 1
    for k in range(1, 8):
        assert optimal_grover_iterations(1 << k, k) == 0
    with pytest.raises(NoSolutions):
        optimal_grover_iterations(0, 3)


def test_grover_uses_diffusion_about_uniform():
    # the diffusion step alone leaves the uniform state fixed
    ast = parse("0 = 1")
    u = uniform_superposition(5)
    assert grover_step(u, ast).allclose(u)


def test_enumeration_feeds_oracle_consistently():
    for text, k, fn in CORPUS:
        sols = enumerate_solutions(parse(text), k)
        s = phase_oracle(uniform_superposition(k), parse(text))
        negative = [i for i, a in enumerate(s.amps) if a.real < 0]
        assert negative == list(sols.members)
