"""Pure optical states in a truncated Fock basis.

Single-mode states are complex amplitude vectors indexed by photon number;
two-mode states are amplitude matrices indexed by the photon numbers of the
two modes.  Generators build the standard toolbox inputs (Fock, coherent,
squeezed vacuum, squeezed cat) from their analytic Fock expansions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NormalizationError,
    ParameterBoundError,
    TruncationError,
    ZeroStateError,
)

# Per-mode truncation cap.  r <= 1.3 squeezed vacuum needs ~141 Fock levels
# to pass the tail rule below, so the cap sits above that.
DIM_CAP = 160
MIN_DIM = 8

# A generator output is accepted only if the top 10% of its indices carry
# less than TAIL_TOL probability and the analytic mass beyond the truncation
# is below DISCARD_TOL.  The second condition guards parity-structured states
# whose top index can be identically zero while the truncation is still bad.
TAIL_TOL = 1e-8
DISCARD_TOL = 1e-10

NORM_TOL = 1e-6

R_MAX = 1.3
ALPHA_MAX = 4.0

# log(n!) lookup, generous enough for two-mode totals and padding.
_LOG_FACT = np.concatenate(
    ([0.0], np.cumsum(np.log(np.arange(1, 2 * DIM_CAP + 64, dtype=float))))
)


def log_factorial(n: int) -> float:
    return float(_LOG_FACT[n])


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SingleModeState:
    """Amplitude vector over one mode's truncated Fock basis.

    ``amps[n]`` is the amplitude of ``|n>``.  Instances are immutable; all
    operations return new states.
    """

    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("single-mode amplitudes must be a non-empty 1-D array")
        object.__setattr__(self, "amps", _freeze(a))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class TwoModeState:
    """Amplitude matrix over two modes; entry (i, j) multiplies ``|i>_a |j>_b``."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps)
        if a.ndim != 2 or a.size < 1:
            raise ValueError("two-mode amplitudes must be a 2-D array")
        object.__setattr__(self, "amps", _freeze(a))

    @property
    def dim_a(self) -> int:
        return self.amps.shape[0]

    @property
    def dim_b(self) -> int:
        return self.amps.shape[1]

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def joint_probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


State = SingleModeState | TwoModeState


def tail_mass(probs: np.ndarray) -> float:
    """Probability carried by the top 10% of indices of a 1-D distribution."""
    dim = probs.shape[0]
    n_tail = max(1, dim // 10)
    total = float(probs.sum())
    if total <= 0.0:
        return 0.0
    return float(probs[dim - n_tail :].sum()) / total


def _check_generator_tail(probs: np.ndarray, discarded: float, what: str) -> None:
    if discarded >= TAIL_TOL or tail_mass(probs) >= TAIL_TOL:
        raise TruncationError(
            f"{what}: support does not fit the truncation "
            f"(tail={tail_mass(probs):.3e}, discarded={discarded:.3e})"
        )


def _adaptive_cut(probs: np.ndarray, what: str) -> int:
    """Smallest dim whose truncation passes the tail and discard rules."""
    total = float(probs.sum())
    cum = np.cumsum(probs)
    for dim in range(MIN_DIM, probs.shape[0] + 1):
        if total - cum[dim - 1] < DISCARD_TOL and tail_mass(probs[:dim]) < TAIL_TOL:
            return dim
    raise TruncationError(f"{what}: no truncation up to {probs.shape[0]} is adequate")


def normalize(state: State) -> tuple[State, float]:
    """Rescale to unit norm; returns (state, previous squared norm).

    The squared norm of the incoming state is what heralded-projection code
    uses as the success probability.
    """
    nsq = state.norm_sq()
    if nsq < 1e-30:
        raise ZeroStateError("cannot normalize a zero state")
    scaled = state.amps / math.sqrt(nsq)
    if isinstance(state, SingleModeState):
        return SingleModeState(scaled), nsq
    return TwoModeState(scaled), nsq


def mean_photon(state: State) -> float:
    """<n> for one mode, or <n_a + n_b> for two modes.  Requires unit norm."""
    nsq = state.norm_sq()
    if abs(nsq - 1.0) > NORM_TOL:
        raise NormalizationError(f"state norm^2 = {nsq:.9f}, expected 1")
    if isinstance(state, SingleModeState):
        n = np.arange(state.dim)
        return float(np.sum(n * state.probabilities()))
    p = state.joint_probabilities()
    i = np.arange(state.dim_a)[:, None]
    j = np.arange(state.dim_b)[None, :]
    return float(np.sum((i + j) * p))


def tensor(a: SingleModeState, b: SingleModeState) -> TwoModeState:
    """Product state: amps[i, j] = a[i] * b[j]."""
    return TwoModeState(np.outer(a.amps, b.amps))


def trim(state: SingleModeState, min_dim: int = MIN_DIM) -> SingleModeState:
    """Re-truncate adaptively, dropping negligible high-photon support.

    Keeps the state normalized.  Used to shrink heralded outputs before
    probe construction so downstream costs track actual support.
    """
    probs = state.probabilities()
    total = float(probs.sum())
    cum = np.cumsum(probs)
    dim = state.dim
    for d in range(min_dim, state.dim + 1):
        if total - cum[d - 1] < DISCARD_TOL * total and tail_mass(probs[:d]) < TAIL_TOL:
            dim = d
            break
    out, _ = normalize(SingleModeState(state.amps[:dim]))
    return out


def pad(state: SingleModeState, dim: int) -> SingleModeState:
    if dim < state.dim:
        raise ValueError("pad target smaller than current dim")
    out = np.zeros(dim, dtype=np.complex128)
    out[: state.dim] = state.amps
    return SingleModeState(out)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def make_fock(n: int, dim: int | None = None) -> SingleModeState:
    """Number state |n>; only n <= 2 is a legal circuit input."""
    if n < 0:
        raise ParameterBoundError("photon number must be non-negative")
    if dim is None:
        dim = max(MIN_DIM, n + 2)
    if n >= dim:
        raise TruncationError(f"|{n}> does not fit in dim {dim}")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[n] = 1.0
    return SingleModeState(amps)


def _coherent_amps(alpha: complex, dim: int) -> np.ndarray:
    if alpha == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return amps
    n = np.arange(dim)
    mag = abs(alpha)
    phase = np.angle(alpha)
    log_mod = -0.5 * mag * mag + n * math.log(mag) - 0.5 * _LOG_FACT[: dim][n]
    return np.exp(log_mod) * np.exp(1j * phase * n)


def make_coherent(alpha: complex, dim: int | None = None) -> SingleModeState:
    """Coherent state |alpha>, amps[n] = e^{-|a|^2/2} a^n / sqrt(n!)."""
    if abs(alpha) > ALPHA_MAX + 1e-12:
        raise ParameterBoundError(f"|alpha| = {abs(alpha):.3f} exceeds {ALPHA_MAX}")
    full = _coherent_amps(alpha, DIM_CAP)
    probs = np.abs(full) ** 2
    if dim is None:
        dim = _adaptive_cut(probs, "coherent state")
    elif dim > DIM_CAP:
        raise TruncationError(f"dim {dim} exceeds cap {DIM_CAP}")
    discarded = max(0.0, 1.0 - float(probs[:dim].sum()))
    _check_generator_tail(probs[:dim], discarded, f"coherent |alpha|={abs(alpha):.3f}")
    out, _ = normalize(SingleModeState(full[:dim]))
    return out


def _squeezed_amps(r: float, theta_s: float, dim: int) -> np.ndarray:
    """Fock expansion of S(z)|0>, z = r e^{i theta}: even levels only.

    c_{2k} = sech(r)^{1/2} (-e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k!)
    """
    amps = np.zeros(dim, dtype=np.complex128)
    if r == 0.0:
        amps[0] = 1.0
        return amps
    lt = math.log(math.tanh(r))
    base = -0.5 * math.log(math.cosh(r))
    for m in range(0, dim, 2):
        k = m // 2
        log_mod = base + 0.5 * _LOG_FACT[m] - k * math.log(2.0) - _LOG_FACT[k] + k * lt
        amps[m] = math.exp(log_mod) * np.exp(1j * k * (theta_s + math.pi))
    return amps


def make_squeezed(r: float, theta_s: float = 0.0, dim: int | None = None) -> SingleModeState:
    """Squeezed vacuum S(z)|0> with z = r e^{i theta_s}."""
    if r < 0:
        raise ParameterBoundError("squeezing amplitude must be non-negative")
    if r > R_MAX + 1e-12:
        raise ParameterBoundError(f"r = {r:.3f} exceeds {R_MAX}")
    full = _squeezed_amps(r, theta_s, DIM_CAP)
    probs = np.abs(full) ** 2
    if dim is None:
        dim = _adaptive_cut(probs, "squeezed vacuum")
    elif dim > DIM_CAP:
        raise TruncationError(f"dim {dim} exceeds cap {DIM_CAP}")
    discarded = max(0.0, 1.0 - float(probs[:dim].sum()))
    _check_generator_tail(probs[:dim], discarded, f"squeezed vacuum r={r:.3f}")
    out, _ = normalize(SingleModeState(full[:dim]))
    return out


def squeeze_matrix(r: float, theta_s: float, dim: int) -> np.ndarray:
    """Truncated S(z) = exp[ (z* a^2 - z a^+2) / 2 ] as a dense matrix."""
    z = r * np.exp(1j * theta_s)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    a2 = a @ a
    gen = 0.5 * (np.conj(z) * a2 - z * a2.conj().T)
    return scipy.linalg.expm(gen)


def make_scs(
    r: float,
    theta_s: float,
    alpha: complex,
    dim: int | None = None,
) -> SingleModeState:
    """Squeezed even cat state, N S(z) (|alpha> + |-alpha>)."""
    if abs(alpha) > ALPHA_MAX + 1e-12:
        raise ParameterBoundError(f"|alpha| = {abs(alpha):.3f} exceeds {ALPHA_MAX}")
    if r < 0 or r > R_MAX + 1e-12:
        raise ParameterBoundError(f"r = {r:.3f} outside [0, {R_MAX}]")
    cat = _coherent_amps(alpha, DIM_CAP) + _coherent_amps(-alpha, DIM_CAP)
    cat /= math.sqrt(float(np.sum(np.abs(cat) ** 2)))
    full = squeeze_matrix(r, theta_s, DIM_CAP) @ cat
    probs = np.abs(full) ** 2
    if dim is None:
        dim = _adaptive_cut(probs, "squeezed cat state")
    elif dim > DIM_CAP:
        raise TruncationError(f"dim {dim} exceeds cap {DIM_CAP}")
    discarded = max(0.0, float(probs.sum()) - float(probs[:dim].sum()))
    _check_generator_tail(probs[:dim], discarded, "squeezed cat state")
    out, _ = normalize(SingleModeState(full[:dim]))
    return out


# ---------------------------------------------------------------------------
# symbolic input descriptions
# ---------------------------------------------------------------------------

_FOCK_INPUT_MAX = 2  # higher Fock inputs are not reliably producible


@dataclass(frozen=True)
class StateSpec:
    """Symbolic description of a circuit input state.

    kind is one of "fock" (n in {0, 1, 2}; vacuum is n = 0), "coherent"
    (mag <= 4 with phase theta_c), or "sv" (r <= 1.3 with phase theta_s).
    """

    kind: str
    n: int = 0
    mag: float = 0.0
    theta_c: float = 0.0
    r: float = 0.0
    theta_s: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fock", "coherent", "sv"):
            raise ParameterBoundError(f"unknown input kind {self.kind!r}")
        if self.kind == "fock" and not 0 <= self.n <= _FOCK_INPUT_MAX:
            raise ParameterBoundError(f"fock input n={self.n} outside 0..{_FOCK_INPUT_MAX}")
        if self.kind == "coherent" and not 0.0 <= self.mag <= ALPHA_MAX + 1e-12:
            raise ParameterBoundError(f"coherent magnitude {self.mag} outside [0, {ALPHA_MAX}]")
        if self.kind == "sv" and not 0.0 <= self.r <= R_MAX + 1e-12:
            raise ParameterBoundError(f"squeezing r={self.r} outside [0, {R_MAX}]")

    def build(self, dim: int | None = None) -> SingleModeState:
        if self.kind == "fock":
            return make_fock(self.n, dim)
        if self.kind == "coherent":
            return make_coherent(self.mag * np.exp(1j * self.theta_c), dim)
        return make_squeezed(self.r, self.theta_s, dim)

    def adaptive_dim(self) -> int:
        return self.build(None).dim

    def to_json(self) -> dict:
        if self.kind == "fock":
            return {"kind": "fock", "n": self.n}
        if self.kind == "coherent":
            return {"kind": "coherent", "mag": self.mag, "theta_c": self.theta_c}
        return {"kind": "sv", "r": self.r, "theta_s": self.theta_s}

    @staticmethod
    def from_json(obj: dict) -> "StateSpec":
        kind = obj["kind"]
        if kind == "fock":
            return StateSpec("fock", n=int(obj["n"]))
        if kind == "coherent":
            return StateSpec(
                "coherent", mag=float(obj["mag"]), theta_c=float(obj.get("theta_c", 0.0))
            )
        if kind == "sv":
            return StateSpec("sv", r=float(obj["r"]), theta_s=float(obj.get("theta_s", 0.0)))
        raise ParameterBoundError(f"unknown input kind {kind!r}")


def vacuum_spec() -> StateSpec:
    return StateSpec("fock", n=0)
