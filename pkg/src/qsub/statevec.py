"""Dense state vectors over an X register, an optional flag qubit and an optional Z register.

Basis ordering is fixed everywhere: X bits are most significant, then the
flag qubit, then the Z bits. Index 0 is the all-zero basis state, so for a
layout with a flag and ``w`` Z bits the basis index of ``|x, y, z>`` is
``(x << (1 + w)) | (y << w) | z``.

States are immutable: every operation returns a freshly allocated vector
and never writes into its inputs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import (
    DegenerateBranch,
    LayoutMismatch,
    LayoutTooLarge,
    NoFlagQubit,
    ZeroResidual,
)

DEFAULT_MAX_BITS = 16
MAX_BITS_ENV = "QSUB_MAX_BITS"

NORM_TOL = 1e-9
ALGEBRA_TOL = 1e-12
DEGENERATE_MASS = 1e-15
ZERO_RESIDUAL = 1e-12


def max_bits() -> int:
    """Largest X-register width allowed; ``QSUB_MAX_BITS`` overrides the default of 16."""
    raw = os.environ.get(MAX_BITS_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_BITS
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{MAX_BITS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{MAX_BITS_ENV} must be >= 1, got {value}")
    return value


def check_width(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise TypeError(f"register width must be an integer, got {type(k).__name__}")
    if k < 1:
        raise ValueError(f"register width must be >= 1, got {k}")
    limit = max_bits()
    if k > limit:
        raise LayoutTooLarge(f"register width {k} exceeds the configured maximum of {limit}")
    return int(k)


def _seed_word(seed: int, domain: int) -> int:
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(domain),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class TrialStreams:
    """Per-trial random streams for one ``(seed, domain)`` pair.

    Trial ``i`` draws from a Philox4x64 generator keyed by
    ``(w, i)``, where ``w`` is a 64-bit word hashed from ``(seed, domain)``
    by ``SeedSequence``. Streams depend only on ``(seed, domain, i)``, not
    on creation order, and are identical on every platform.

    ``at`` re-keys and returns one shared generator, which is much cheaper
    than building a new one; the handle from the previous call is
    invalidated. Use ``trial_stream`` for an independent object.
    """

    def __init__(self, seed: int, domain: int = 0):
        self.seed = int(seed)
        self.domain = int(domain)
        self._word = _seed_word(self.seed, self.domain)
        self._bitgen = np.random.Philox(key=self._word)
        self._template = self._bitgen.state
        self._gen = np.random.Generator(self._bitgen)

    def at(self, index: int) -> np.random.Generator:
        if not 0 <= index < 1 << 64:
            raise ValueError(f"trial index out of range: {index}")
        state = self._template
        state["state"]["key"] = np.array([self._word, index], dtype=np.uint64)
        self._bitgen.state = state
        return self._gen


def trial_stream(seed: int, index: int, domain: int = 0) -> np.random.Generator:
    """A fresh generator for trial ``index``; same draws as ``TrialStreams(seed, domain).at(index)``."""
    key = _seed_word(seed, domain) | (int(index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RegisterLayout:
    x_width: int
    has_flag: bool = False
    z_width: int = 0

    def __post_init__(self):
        check_width(self.x_width)
        if self.z_width not in (0, self.x_width):
            raise ValueError(
                f"z_width must be 0 or equal to x_width ({self.x_width}), got {self.z_width}"
            )

    @property
    def num_qubits(self) -> int:
        return self.x_width + int(self.has_flag) + self.z_width

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def shape(self) -> tuple[int, int, int]:
        """(X, flag, Z) axis sizes for reshaping the amplitude vector."""
        return (1 << self.x_width, 2 if self.has_flag else 1, 1 << self.z_width)

    def index(self, x: int, flag: int = 0, z: int = 0) -> int:
        return (((x << int(self.has_flag)) | flag) << self.z_width) | z

    @cached_property
    def without_flag(self) -> RegisterLayout:
        return self if not self.has_flag else RegisterLayout(self.x_width, False, self.z_width)

    @cached_property
    def with_flag(self) -> RegisterLayout:
        return self if self.has_flag else RegisterLayout(self.x_width, True, self.z_width)


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128, copy=True).reshape(-1)
        if amps.shape[0] != self.layout.dim:
            raise LayoutMismatch(
                f"expected {self.layout.dim} amplitudes for {self.layout}, got {amps.shape[0]}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    def __len__(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def x_amplitudes(self) -> np.ndarray:
        """Amplitudes as a (2**x_width, flag, 2**z_width) array view."""
        return self.amps.reshape(self.layout.shape)

    def allclose(self, other: StateVector, atol: float = ALGEBRA_TOL) -> bool:
        return self.layout == other.layout and bool(
            np.max(np.abs(self.amps - other.amps), initial=0.0) <= atol
        )


@dataclass(frozen=True)
class MeasurementOutcome:
    observed_bit: int
    probability_of_observed: float
    posterior: StateVector


def adopt(layout: RegisterLayout, amps: np.ndarray) -> StateVector:
    """Wrap a freshly computed complex128 buffer without copying it.

    The caller hands over ownership: ``amps`` is frozen and must not be
    referenced elsewhere.
    """
    amps.flags.writeable = False
    state = object.__new__(StateVector)
    object.__setattr__(state, "layout", layout)
    object.__setattr__(state, "amps", amps)
    return state


def uniform_superposition(layout: RegisterLayout | int) -> StateVector:
    """Equal superposition over X, with the flag and Z qubits held at |0>."""
    if not isinstance(layout, RegisterLayout):
        layout = RegisterLayout(layout)
    amps = np.zeros(layout.shape, dtype=np.complex128)
    amps[:, 0, 0] = 2.0 ** (-layout.x_width / 2)
    return adopt(layout, amps.reshape(-1))


def uniform_over(k: int, members: Iterable[int]) -> StateVector:
    """Uniform superposition over the given X values of a flagless k-qubit register."""
    layout = RegisterLayout(k)
    idx = np.fromiter(sorted(set(int(m) for m in members)), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("cannot build a uniform superposition over an empty set")
    if idx[0] < 0 or idx[-1] >= layout.dim:
        raise ValueError(f"members must lie in [0, {layout.dim})")
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[idx] = 1.0 / math.sqrt(idx.size)
    return adopt(layout, amps)


def basis_state(layout: RegisterLayout | int, index: int) -> StateVector:
    if not isinstance(layout, RegisterLayout):
        layout = RegisterLayout(layout)
    if not 0 <= index < layout.dim:
        raise ValueError(f"basis index {index} out of range for {layout.dim} amplitudes")
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[index] = 1.0
    return adopt(layout, amps)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.layout != b.layout:
        raise LayoutMismatch(f"inner product of {a.layout} with {b.layout}")
    return complex(np.vdot(a.amps, b.amps))


def flag_masses(state: StateVector) -> tuple[float, float]:
    """Unnormalized Born masses of the flag=0 and flag=1 branches."""
    if not state.layout.has_flag:
        raise NoFlagQubit(f"{state.layout} has no flag qubit")
    amps = state.x_amplitudes()
    b0, b1 = amps[:, 0, :], amps[:, 1, :]
    return float(np.vdot(b0, b0).real), float(np.vdot(b1, b1).real)


def flag_probabilities(state: StateVector) -> tuple[float, float]:
    m0, m1 = flag_masses(state)
    total = m0 + m1
    return m0 / total, m1 / total


def measure_flag(state: StateVector, rng: np.random.Generator) -> MeasurementOutcome:
    """Projectively measure the flag qubit and drop it from the posterior layout."""
    m0, m1 = flag_masses(state)
    total = m0 + m1
    p1 = m1 / total
    bit = 1 if rng.random() < p1 else 0
    mass = m1 if bit else m0
    if mass < DEGENERATE_MASS:
        raise DegenerateBranch(f"sampled flag={bit} from a branch of mass {mass:.3e}")
    branch = state.x_amplitudes()[:, bit, :] / math.sqrt(mass)
    posterior = adopt(state.layout.without_flag, branch.reshape(-1))
    return MeasurementOutcome(bit, mass / total, posterior)


def measure_all(state: StateVector, rng: np.random.Generator) -> int:
    """Measure every qubit; returns the observed basis index."""
    cdf = np.cumsum(state.probabilities())
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(cdf) - 1))


def rejection(a: StateVector, b: StateVector) -> StateVector:
    """normalize(a - <b|a> b): the part of ``a`` orthogonal to ``b``.

    Raises ZeroResidual when ``a`` is (numerically) parallel to ``b``.
    """
    coeff = inner_product(b, a)
    residual = a.amps - coeff * b.amps
    norm = float(np.linalg.norm(residual))
    if norm < ZERO_RESIDUAL:
        raise ZeroResidual(f"residual norm {norm:.3e}: the states are parallel")
    return adopt(a.layout, residual / norm)
