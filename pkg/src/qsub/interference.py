"""Realizations of the step that turns the non-solution register into solutions.

Two constructions are provided:

* ``ideal_interfere`` removes the component of a fresh uniform register that
  lies along the measured non-solution state (orthogonal rejection). The
  result is exactly the uniform superposition over solutions, but the
  operation depends on the overlap between the two states, i.e. on the
  number of solutions, and is not a fixed physical operation.
* ``postselected_subtract`` is physically realizable: an ancilla in |+>
  selects between preparing the uniform state and the non-solution state,
  a Hadamard on the ancilla interferes the two branches, and measuring the
  ancilla in |1> leaves (u_all - x_tilde)/2 behind. Success is
  probabilistic and the surviving state keeps some non-solution weight.

``unitarity_witness`` checks pairs of solution sets for an inner-product
mismatch, which rules out any single unitary doing the job for both.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DegenerateSet
from .predicate import PredicateAst, SolutionSet, truth_table
from .statevec import (
    StateVector,
    adopt,
    inner_product,
    measure_flag,
    rejection,
    uniform_over,
    uniform_superposition,
)

WITNESS_THRESHOLD = 1e-6


class InterferenceMode(enum.Enum):
    IDEAL_REJECTION = "ideal"
    POSTSELECTED_SUBTRACTION = "postselected"


@dataclass(frozen=True)
class SubtractionOutcome:
    succeeded: bool
    ancilla_success_probability: float
    result: StateVector | None
    # Born mass of ``result`` on solution indices; None when the attempt failed.
    solution_support_mass: float | None = None


@dataclass(frozen=True)
class WitnessReport:
    k: int
    set_a: SolutionSet
    set_b: SolutionSet
    input_overlap: float
    output_overlap: float
    mismatch: float
    verdict: bool


def _check_x_tilde(x_tilde: StateVector, k: int):
    layout = x_tilde.layout
    if layout.x_width != k or layout.has_flag or layout.z_width:
        raise ValueError(f"expected a flagless {k}-qubit state, got {layout}")


def ideal_interfere(x_tilde: StateVector, k: int) -> StateVector:
    """Reject the measured non-solution state from a fresh uniform Z register.

    Raises ZeroResidual when ``x_tilde`` is the full uniform state (no
    solutions to reveal).
    """
    _check_x_tilde(x_tilde, k)
    return rejection(uniform_superposition(k), x_tilde)


def subtraction_state(x_tilde: StateVector, k: int) -> StateVector:
    """Joint ancilla-register state just before the ancilla is measured.

    The ancilla occupies the flag slot of a ``(k, flag)`` layout, so its
    |1> branch holds (u_all - x_tilde)/2.
    """
    _check_x_tilde(x_tilde, k)
    # controlled preparation from |+>: ancilla 0 -> u_all, ancilla 1 -> x_tilde
    branch0 = 2.0 ** (-k / 2) / math.sqrt(2)
    branch1 = x_tilde.amps / math.sqrt(2)
    # Hadamard on the ancilla
    joint = np.empty((1 << k, 2), dtype=np.complex128)
    joint[:, 0] = (branch0 + branch1) / math.sqrt(2)
    joint[:, 1] = (branch0 - branch1) / math.sqrt(2)
    return adopt(x_tilde.layout.with_flag, joint.reshape(-1))


def postselected_subtract(
    ast: PredicateAst, k: int, x_tilde: StateVector, rng: np.random.Generator
) -> SubtractionOutcome:
    joint = subtraction_state(x_tilde, k)
    outcome = measure_flag(joint, rng)
    p_observed = outcome.probability_of_observed
    p_success = p_observed if outcome.observed_bit else 1.0 - p_observed
    if not outcome.observed_bit:
        return SubtractionOutcome(False, p_success, None)
    result = outcome.posterior
    marked = truth_table(ast, k)
    support = float(np.sum(np.abs(result.amps[marked]) ** 2))
    return SubtractionOutcome(True, p_success, result, support)


def subtraction_success_probability(n: int, k: int) -> float:
    """(1 - sqrt(1 - n/2**k)) / 2 for the exact non-solution input."""
    return (1.0 - math.sqrt(1.0 - n / (1 << k))) / 2.0


def _check_witness_set(s: SolutionSet, k: int, name: str):
    if s.k != k:
        raise ValueError(f"{name} has k={s.k}, expected {k}")
    if s.n == 0 or s.n == 1 << k:
        raise DegenerateSet(f"{name} must be a nonempty proper subset of [0, {1 << k})")


def unitarity_witness(k: int, set_a: SolutionSet, set_b: SolutionSet) -> WitnessReport:
    """Compare overlaps before and after the required mapping for two solution sets.

    A fixed unitary would have to send u_ns(A) -> u_s(A) and u_ns(B) -> u_s(B)
    while preserving <u_ns(A)|u_ns(B)>, so any mismatch rules it out.
    """
    _check_witness_set(set_a, k, "set_a")
    _check_witness_set(set_b, k, "set_b")
    before = inner_product(uniform_over(k, set_a.non_members()), uniform_over(k, set_b.non_members()))
    after = inner_product(uniform_over(k, set_a.members), uniform_over(k, set_b.members))
    input_overlap, output_overlap = before.real, after.real
    mismatch = abs(input_overlap - output_overlap)
    return WitnessReport(
        k=k,
        set_a=set_a,
        set_b=set_b,
        input_overlap=input_overlap,
        output_overlap=output_overlap,
        mismatch=mismatch,
        verdict=mismatch > WITNESS_THRESHOLD,
    )


def singleton_witnesses(k: int) -> Iterator[WitnessReport]:
    """Witness reports for every pair of distinct single-solution sets."""
    for a, b in itertools.combinations(range(1 << k), 2):
        yield unitarity_witness(k, SolutionSet(k, (a,)), SolutionSet(k, (b,)))
