"""The marking oracle Uc and the Grover baseline built from the same predicate.

Uc acts as the basis permutation |x, y> -> |x, y XOR f(x)>, with f(x) = 1
exactly when x is a solution. The oracle is applied as a whole permutation
from the predicate's truth table, not as a synthesized gate network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoFlagQubit, NoSolutions
from .predicate import PredicateAst, truth_table
from .statevec import StateVector, adopt, flag_masses


@dataclass(frozen=True)
class BranchAmplitudes:
    """Norms of the solution (flag=1) and non-solution (flag=0) branches."""

    a: float
    b: float


def apply_uc(state: StateVector, ast: PredicateAst) -> StateVector:
    layout = state.layout
    if not layout.has_flag:
        raise NoFlagQubit(f"Uc needs a flag qubit; layout is {layout}")
    marked = truth_table(ast, layout.x_width)
    amps = state.x_amplitudes().copy()
    amps[marked] = amps[marked][:, ::-1, :]
    return adopt(layout, amps.reshape(-1))


def branch_amplitudes(state: StateVector) -> BranchAmplitudes:
    m0, m1 = flag_masses(state)
    return BranchAmplitudes(a=math.sqrt(m1), b=math.sqrt(m0))


def _require_flagless(state: StateVector, what: str):
    if state.layout.has_flag:
        raise ValueError(f"{what} acts on a flagless register; layout is {state.layout}")


def phase_oracle(state: StateVector, ast: PredicateAst) -> StateVector:
    """Multiply the amplitude of every solution |x> by -1."""
    _require_flagless(state, "phase_oracle")
    marked = truth_table(ast, state.layout.x_width)
    amps = state.x_amplitudes().copy()
    amps[marked] *= -1
    return adopt(state.layout, amps.reshape(-1))


def diffusion(state: StateVector) -> StateVector:
    """Reflection 2|u><u| - I about the uniform superposition of X."""
    _require_flagless(state, "diffusion")
    if state.layout.z_width:
        raise ValueError("diffusion is defined on a bare X register")
    amps = 2.0 * state.amps.mean() - state.amps
    return adopt(state.layout, amps)


def grover_step(state: StateVector, ast: PredicateAst) -> StateVector:
    return diffusion(phase_oracle(state, ast))


def success_probability(state: StateVector, ast: PredicateAst) -> float:
    """Probability that measuring X yields a solution."""
    marked = truth_table(ast, state.layout.x_width)
    probs = np.abs(state.x_amplitudes()) ** 2
    return float(probs[marked].sum())


def optimal_grover_iterations(n: int, k: int) -> int:
    if n <= 0:
        raise NoSolutions("Grover search needs at least one solution")
    size = 1 << k
    if n > size:
        raise ValueError(f"n={n} exceeds the register size {size}")
    return math.floor(math.pi / 4 * math.sqrt(size / n))


def grover_success_closed_form(n: int, k: int, iterations: int) -> float:
    """sin^2((2j + 1) theta) with sin(theta) = sqrt(n / 2**k)."""
    theta = math.asin(math.sqrt(n / (1 << k)))
    return math.sin((2 * iterations + 1) * theta) ** 2
