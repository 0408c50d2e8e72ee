"""Phase-estimation figures of merit.

The probe generator is G = (n_a - n_b) / 2, so for a pure two-mode probe the
Fisher information is F = 4 Var(G), computable from the joint photon-number
distribution alone.  Photon loss is an amplitude-damping channel per arm
(beam-splitter mixing with a vacuum ancilla, ancilla traced out); the mixed
state's Fisher information comes from the eigendecomposition formula with
d(rho)/d(phi) = i [G, rho].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDensityMatrix,
    NormalizationError,
    ParameterBoundError,
    ZeroPhotonError,
)
from .hilbert import (
    NORM_TOL,
    R_MAX,
    SingleModeState,
    TwoModeState,
    log_factorial,
    make_coherent,
    make_squeezed,
    tensor,
)
from .operators import apply_beam_splitter

EIGENPAIR_CUTOFF = 1e-12  # lambda_i + lambda_j below this carry no information
LOSS_DIM = 25  # per-arm truncation for density-matrix work


@dataclass(frozen=True)
class DensityMatrix:
    """Two-mode mixed state on the flattened |n_a, n_b> basis."""

    mat: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=np.complex128)
        d = self.dim_a * self.dim_b
        if m.shape != (d, d):
            raise InvalidDensityMatrix(f"shape {m.shape} does not match dims {d} x {d}")
        if np.max(np.abs(m - m.conj().T)) > 1e-8:
            raise InvalidDensityMatrix("matrix is not Hermitian within 1e-8")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > 1e-9:
            raise InvalidDensityMatrix(f"trace = {tr:.12f}, expected 1")
        object.__setattr__(self, "mat", m)

    def purity(self) -> float:
        return float(np.sum(np.abs(self.mat) ** 2))

    def generator_diagonal(self) -> np.ndarray:
        """Eigenvalues of G = (n_a - n_b)/2 along the flattened basis."""
        i = np.arange(self.dim_a)[:, None]
        j = np.arange(self.dim_b)[None, :]
        return (0.5 * (i - j)).ravel()

    def number_diagonal(self) -> np.ndarray:
        i = np.arange(self.dim_a)[:, None]
        j = np.arange(self.dim_b)[None, :]
        return (i + j).astype(float).ravel()

    def mean_photon(self) -> float:
        return float(np.real(np.sum(self.number_diagonal() * np.diag(self.mat))))


ProbeState = TwoModeState | DensityMatrix


def pair_probe(psi: SingleModeState) -> TwoModeState:
    """Two identical copies across the interferometer arms."""
    return tensor(psi, psi)


def qfi_pure(p: TwoModeState) -> float:
    """F = 4 (<G^2> - <G>^2) from the joint photon-number distribution."""
    nsq = p.norm_sq()
    if abs(nsq - 1.0) > NORM_TOL:
        raise NormalizationError(f"probe norm^2 = {nsq:.9f}, expected 1")
    probs = p.joint_probabilities()
    i = np.arange(p.dim_a)[:, None]
    j = np.arange(p.dim_b)[None, :]
    g = 0.5 * (i - j)
    mean = float(np.sum(g * probs))
    second = float(np.sum(g * g * probs))
    return max(0.0, 4.0 * (second - mean * mean))


def _loss_coefficients(dim: int, lost: int, eta: float) -> np.ndarray:
    """Amplitude factor for keeping n of n+lost photons at transmissivity eta.

    coeff[n] = sqrt( C(n+lost, lost) eta^n (1-eta)^lost ); these are the
    matrix elements of the beam-splitter dilation after projecting the
    vacuum ancilla onto |lost>.
    """
    n = np.arange(dim - lost, dtype=float)
    if eta == 0.0:
        log_eta_part = np.where(n == 0, 0.0, -np.inf)
    else:
        log_eta_part = n * math.log(eta)
    log_binom = np.array(
        [
            log_factorial(int(m) + lost) - log_factorial(int(m)) - log_factorial(lost)
            for m in n
        ]
    )
    if lost == 0:
        log_loss_part = 0.0
    elif eta == 1.0:
        return np.zeros(dim - lost)
    else:
        log_loss_part = lost * math.log(1.0 - eta)
    return np.exp(0.5 * (log_binom + log_eta_part + log_loss_part))


def apply_loss(p: ProbeState, eta_a: float, eta_b: float | None = None) -> DensityMatrix:
    """Photon loss on each arm at transmissivity eta (1 = lossless)."""
    if eta_b is None:
        eta_b = eta_a
    for eta in (eta_a, eta_b):
        if not 0.0 <= eta <= 1.0:
            raise ParameterBoundError(f"transmissivity {eta} outside [0, 1]")
    if isinstance(p, TwoModeState):
        return _apply_loss_pure(p, eta_a, eta_b)
    return _apply_loss_mixed(p, eta_a, eta_b)


def _apply_loss_pure(p: TwoModeState, eta_a: float, eta_b: float) -> DensityMatrix:
    da, db = p.dim_a, p.dim_b
    branches = []
    for la in range(da):
        ca = _loss_coefficients(da, la, eta_a)
        if not np.any(ca):
            continue
        for lb in range(db):
            cb = _loss_coefficients(db, lb, eta_b)
            if not np.any(cb):
                continue
            block = p.amps[la:, lb:] * ca[:, None] * cb[None, :]
            vec = np.zeros((da, db), dtype=np.complex128)
            vec[: da - la, : db - lb] = block
            branches.append(vec.ravel())
    stack = np.array(branches)
    rho = stack.T @ stack.conj()
    rho /= np.trace(rho).real
    return DensityMatrix(rho, da, db)


def _kraus_pair(dim: int, lost: int, eta: float) -> np.ndarray:
    k = np.zeros((dim, dim))
    coeff = _loss_coefficients(dim, lost, eta)
    for n, c in enumerate(coeff):
        k[n, n + lost] = c
    return k


def _apply_loss_mixed(p: DensityMatrix, eta_a: float, eta_b: float) -> DensityMatrix:
    da, db = p.dim_a, p.dim_b
    out = np.zeros_like(p.mat)
    for la in range(da):
        ka = _kraus_pair(da, la, eta_a)
        if not np.any(ka):
            continue
        for lb in range(db):
            kb = _kraus_pair(db, lb, eta_b)
            if not np.any(kb):
                continue
            kk = np.kron(ka, kb)
            out += kk @ p.mat @ kk.conj().T
    out /= np.trace(out).real
    return DensityMatrix(out, da, db)


def qfi_mixed(rho: DensityMatrix) -> float:
    """Eigendecomposition Fisher information with d(rho)/d(phi) = i [G, rho].

    F = sum_{i,j} 2 (l_i - l_j)^2 / (l_i + l_j) |<l_i|G|l_j>|^2 over pairs
    with l_i + l_j above the kernel cutoff.
    """
    if np.max(np.abs(rho.mat - rho.mat.conj().T)) > 1e-8:
        raise InvalidDensityMatrix("matrix is not Hermitian within 1e-8")
    evals, evecs = np.linalg.eigh(rho.mat)
    if evals.min() < -1e-10:
        raise InvalidDensityMatrix(f"negative eigenvalue {evals.min():.3e}")
    g = rho.generator_diagonal()
    g_eig = evecs.conj().T @ (g[:, None] * evecs)
    lam_sum = evals[:, None] + evals[None, :]
    lam_diff = evals[:, None] - evals[None, :]
    mask = lam_sum > EIGENPAIR_CUTOFF
    terms = np.zeros_like(lam_sum)
    terms[mask] = 2.0 * lam_diff[mask] ** 2 / lam_sum[mask]
    return float(max(0.0, np.sum(terms * np.abs(g_eig) ** 2)))


def qfi(p: ProbeState) -> float:
    if isinstance(p, TwoModeState):
        return qfi_pure(p)
    return qfi_mixed(p)


@dataclass(frozen=True)
class MeritReport:
    """QFI, photon budget, QFI-per-photon, and the resulting precision bound."""

    qfi: float
    nbar: float

    @property
    def gamma(self) -> float:
        return self.qfi / self.nbar

    def crb(self, mu: float = 1.0) -> float:
        """Phase-uncertainty lower bound 1 / sqrt(mu * F)."""
        return 1.0 / math.sqrt(mu * self.qfi)

    def to_json(self) -> dict:
        return {"qfi": self.qfi, "nbar": self.nbar, "gamma": self.gamma}


def merit(p: ProbeState) -> MeritReport:
    if isinstance(p, TwoModeState):
        nbar = float(
            np.sum(
                (np.arange(p.dim_a)[:, None] + np.arange(p.dim_b)[None, :])
                * p.joint_probabilities()
            )
        )
        f = qfi_pure(p)
    else:
        nbar = p.mean_photon()
        f = qfi_mixed(p)
    if nbar <= 1e-12:
        raise ZeroPhotonError("probe carries no photons")
    return MeritReport(qfi=f, nbar=nbar)


def sv_nbar(r: float) -> float:
    """Total photons in a squeezed-vacuum pair probe."""
    return 2.0 * math.sinh(r) ** 2


def sv_r_for_nbar(nbar: float) -> float:
    r = math.asinh(math.sqrt(nbar / 2.0))
    if r > R_MAX + 1e-12:
        raise ParameterBoundError(
            f"nbar = {nbar:.4f} needs r = {r:.4f} > {R_MAX} per arm"
        )
    return r


def sv_probe(r: float, theta_s: float = 0.0) -> TwoModeState:
    psi = make_squeezed(r, theta_s)
    return pair_probe(psi)


def sv_baseline(nbar: float) -> MeritReport:
    """Squeezed-vacuum pair |z, z> at the requested total photon number."""
    if nbar <= 0:
        raise ZeroPhotonError("nbar must be positive")
    r = sv_r_for_nbar(nbar)
    return merit(sv_probe(r))


def snl_probe(alpha: float) -> TwoModeState:
    """Coherent state through a balanced splitter: the classical benchmark."""
    coh = make_coherent(alpha)
    vac = make_coherent(0.0, dim=coh.dim)
    return apply_beam_splitter(50.0, tensor(coh, vac))


def snl_baseline(nbar: float) -> MeritReport:
    """Shot-noise limit: F = nbar by definition."""
    if nbar <= 0:
        raise ZeroPhotonError("nbar must be positive")
    return MeritReport(qfi=nbar, nbar=nbar)
