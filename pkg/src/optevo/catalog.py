"""Discovered circuit templates and baseline states for the CLI.

The six discovered structures (t1..t6) ship with their circuit shape only;
continuous parameters are produced on demand by coordinate refinement at a
requested photon number, since no canonical parameter set is published.
Refined genomes can be cached to JSON and rebuilt exactly.
"""

from __future__ import annotations

import math

from .errors import UsageError
from .hilbert import SingleModeState, StateSpec, make_coherent, make_scs, make_squeezed
from .operators import OperatorSpec
from .postselect import MeasurementSpec
from .search import FitnessKind, Genome, SearchConfig, evaluate, refine

TEMPLATE_LABELS = ("t1", "t2", "t3", "t4", "t5", "t6")
STATE_LABELS = TEMPLATE_LABELS + ("sv", "snl", "scs")

_ID = OperatorSpec("id")


def template(label: str) -> Genome:
    """Structure-only genome for a discovered state; params are placeholders."""
    sv1 = StateSpec("sv", r=0.6)
    sv2 = StateSpec("sv", r=0.6, theta_s=math.pi)
    if label == "t1":
        return Genome(
            input_a=sv1,
            input_b=sv2,
            ops=(OperatorSpec("bs", t_pct=15.0), _ID),
            final_meas=MeasurementSpec("number", k=2),
        )
    if label == "t2":
        return Genome(
            input_a=sv1,
            input_b=sv2,
            ops=(OperatorSpec("disp", beta_mag=1.0, mode="a"), OperatorSpec("bs", t_pct=65.0)),
            final_meas=MeasurementSpec("number", k=3),
        )
    if label == "t3":
        return Genome(
            input_a=StateSpec("fock", n=0),
            input_b=StateSpec("sv", r=0.62),
            ops=(
                OperatorSpec("bs", t_pct=25.0),
                OperatorSpec("disp", beta_mag=1.0, mode="b"),
                OperatorSpec("disp", beta_mag=1.0, mode="a"),
            ),
            final_meas=MeasurementSpec("number", k=3),
        )
    if label == "t4":
        return Genome(
            input_a=sv1,
            input_b=sv2,
            ops=(OperatorSpec("disp", beta_mag=1.0, mode="a"), OperatorSpec("bs", t_pct=55.0)),
            final_meas=MeasurementSpec("number", k=4),
        )
    if label == "t5":
        return Genome(
            input_a=StateSpec("fock", n=2),
            input_b=StateSpec("sv", r=0.6),
            ops=(OperatorSpec("bs", t_pct=95.0), _ID),
            final_meas=MeasurementSpec("quadrature", x=0.0, lam=0.0),
        )
    if label == "t6":
        return Genome(
            input_a=StateSpec("coherent", mag=1.0),
            input_b=StateSpec("sv", r=0.6),
            ops=(OperatorSpec("bs", t_pct=75.0), _ID),
            final_meas=MeasurementSpec("number", k=1),
        )
    raise UsageError(f"unknown template {label!r}; choose one of {TEMPLATE_LABELS}")


def refine_template(
    label: str,
    nbar: float | None = None,
    nbar_tolerance: float = 0.1,
    sweeps: int = 3,
    genome: Genome | None = None,
) -> tuple[Genome, "FitnessReport"]:
    """Refine a template's continuous parameters.

    With a target nbar the fitness is QFI damped outside the nbar window;
    otherwise plain QFI-per-photon.  Returns the refined genome and its
    evaluation under that fitness.
    """
    base = genome if genome is not None else template(label)
    if nbar is not None:
        fitness = FitnessKind("qfi_at_nbar", target=nbar, tolerance=nbar_tolerance * nbar)
    else:
        fitness = FitnessKind("gamma")
    cfg = SearchConfig(
        m=len(base.ops), fitness=fitness, herald_floor=0.0, refine_sweeps=sweeps
    )
    refined = refine(base, cfg)
    return refined, evaluate(refined, cfg)


def scs_state(r: float, alpha: float, dim: int | None = None) -> SingleModeState:
    return make_scs(r, 0.0, alpha, dim)


def optimize_scs(nbar: float, grid: int = 25) -> tuple[float, float]:
    """Pick (r, alpha) maximizing the pair-probe QFI at fixed total nbar.

    Scans alpha and solves r from the photon budget of the squeezed cat; a
    coarse grid is enough since the ridge is broad.
    """
    from .hilbert import mean_photon
    from .metrology import pair_probe, qfi_pure

    best = (0.0, 0.0, -1.0)
    for alpha in [i * 2.0 / grid for i in range(grid + 1)]:
        lo, hi = 0.0, 1.3
        # bisect r so the pair probe hits the requested nbar
        def pair_nbar(r: float) -> float:
            return 2.0 * mean_photon(scs_state(r, alpha))

        if pair_nbar(hi) < nbar:
            continue
        if pair_nbar(lo) > nbar:
            continue
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if pair_nbar(mid) < nbar:
                lo = mid
            else:
                hi = mid
        r = 0.5 * (lo + hi)
        f = qfi_pure(pair_probe(scs_state(r, alpha)))
        if f > best[2]:
            best = (r, alpha, f)
    return best[0], best[1]
