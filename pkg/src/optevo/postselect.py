"""Heralded projection of one mode onto number or quadrature eigenstates.

Projecting mode ``a`` of a two-mode state with a bra <m| leaves the other
mode in a (renormalized) single-mode state; the squared norm before
renormalization is the herald probability.  Quadrature projections are exact
(zero detector width), so their "probability" is a probability density and
is flagged as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterBoundError, ZeroStateError
from .hilbert import SingleModeState, TwoModeState, normalize

NUMBER_K_MAX = 4  # photon-number-resolving detectors resolve at most 4

_PI_QUARTER = math.pi ** (-0.25)


@dataclass(frozen=True)
class MeasurementSpec:
    """Post-selection measurement: <k| photon counting or <x_lambda| quadrature.

    kind "number" carries k in 0..4; k = 0 is only legal inside a
    measure-and-replace operator, not as a circuit's final measurement.
    kind "quadrature" carries the eigenvalue x and quadrature angle lam.
    """

    kind: str
    k: int = 1
    x: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("number", "quadrature"):
            raise ParameterBoundError(f"unknown measurement kind {self.kind!r}")
        if self.kind == "number" and not 0 <= self.k <= NUMBER_K_MAX:
            raise ParameterBoundError(f"number measurement k={self.k} outside 0..{NUMBER_K_MAX}")

    def to_json(self) -> dict:
        if self.kind == "number":
            return {"kind": "number", "k": self.k}
        return {"kind": "quadrature", "x": self.x, "lambda": self.lam}

    @staticmethod
    def from_json(obj: dict) -> "MeasurementSpec":
        if obj["kind"] == "number":
            return MeasurementSpec("number", k=int(obj["k"]))
        if obj["kind"] == "quadrature":
            return MeasurementSpec(
                "quadrature", x=float(obj["x"]), lam=float(obj.get("lambda", 0.0))
            )
        raise ParameterBoundError(f"unknown measurement kind {obj['kind']!r}")


@dataclass(frozen=True)
class HeraldedState:
    """Normalized post-measurement state plus its herald probability.

    ``density`` is True for quadrature heralds, whose ``prob`` is an
    unnormalized density rather than a probability.
    """

    state: SingleModeState
    prob: float
    density: bool = False


def hermite_functions(n_max: int, x: float) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions phi_0..phi_nmax at x.

    phi_n(x) = pi^{-1/4} 2^{-n/2} (n!)^{-1/2} H_n(x) e^{-x^2/2}, evaluated
    with the normalized three-term recurrence so magnitudes stay bounded
    (raw Hermite polynomials overflow near n = 60).
    """
    phi = np.zeros(n_max + 1)
    phi[0] = _PI_QUARTER * math.exp(-0.5 * x * x)
    if n_max >= 1:
        phi[1] = math.sqrt(2.0) * x * phi[0]
    for n in range(1, n_max):
        phi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * phi[n] - math.sqrt(
            n / (n + 1)
        ) * phi[n - 1]
    return phi


def quadrature_amp(n: int, x: float, lam: float) -> complex:
    """Wavefunction <x_lambda|n> = phi_n(x) e^{-i n lambda}."""
    if n < 0:
        raise ParameterBoundError("photon number must be non-negative")
    return complex(hermite_functions(n, x)[n] * np.exp(-1j * n * lam))


def _measured_axis(mode: str) -> int:
    if mode == "a":
        return 0
    if mode == "b":
        return 1
    raise ParameterBoundError(f"mode must be 'a' or 'b', got {mode!r}")


def project_number(k: int, mode: str, s: TwoModeState) -> HeraldedState:
    """Herald on <k| in the given mode; returns the other mode's state."""
    axis = _measured_axis(mode)
    dim = s.dim_a if axis == 0 else s.dim_b
    if not 0 <= k < dim:
        raise DimensionError(f"cannot project <{k}| on a mode of dim {dim}")
    row = s.amps[k, :] if axis == 0 else s.amps[:, k]
    prob = float(np.sum(np.abs(row) ** 2))
    if prob < 1e-12:
        raise ZeroStateError(f"no |{k}> component in mode {mode}")
    state, _ = normalize(SingleModeState(row))
    return HeraldedState(state=state, prob=prob)


def project_quadrature(x: float, lam: float, mode: str, s: TwoModeState) -> HeraldedState:
    """Herald on the quadrature eigenstate <x_lambda| in the given mode."""
    axis = _measured_axis(mode)
    dim = s.dim_a if axis == 0 else s.dim_b
    phi = hermite_functions(dim - 1, x)
    bra = np.conj(phi * np.exp(-1j * lam * np.arange(dim)))
    out = bra @ s.amps if axis == 0 else s.amps @ bra
    dens = float(np.sum(np.abs(out) ** 2))
    if dens < 1e-12:
        raise ZeroStateError(f"quadrature projection at x={x} annihilates mode {mode}")
    state, _ = normalize(SingleModeState(out))
    return HeraldedState(state=state, prob=dens, density=True)


def project(meas: MeasurementSpec, mode: str, s: TwoModeState) -> HeraldedState:
    if meas.kind == "number":
        return project_number(meas.k, mode, s)
    return project_quadrature(meas.x, meas.lam, mode, s)
