"""Hill-climbing evolutionary search over heralded circuit genomes.

A genome is two input slots, an operator sequence, and a final post-selection
measurement on mode a.  Each restart samples a small random population, keeps
the fittest as parent, and mutates until offspring repeatedly fail to improve
(a dead end); the parent is then archived as that restart's champion.
No crossover is used.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ParameterBoundError,
    TruncationError,
    ZeroPhotonError,
    ZeroStateError,
)
from .hilbert import (
    ALPHA_MAX,
    DIM_CAP,
    R_MAX,
    SingleModeState,
    StateSpec,
    mean_photon,
    tensor,
    trim,
)
from .metrology import pair_probe, qfi_pure
from .operators import BS_T_CHOICES, DISPLACEMENT_PAD, OperatorSpec
from .postselect import MeasurementSpec, project

TWO_PI = 2.0 * math.pi
QUAD_X_RANGE = (-3.0, 3.0)  # sampling/refinement window for quadrature eigenvalues
M_MIN, M_MAX = 2, 12


@dataclass(frozen=True)
class Genome:
    input_a: StateSpec
    input_b: StateSpec
    ops: tuple[OperatorSpec, ...]
    final_meas: MeasurementSpec

    def __post_init__(self):
        if not M_MIN <= len(self.ops) <= M_MAX:
            raise ParameterBoundError(
                f"operator count {len(self.ops)} outside [{M_MIN}, {M_MAX}]"
            )
        if self.final_meas.kind == "number" and self.final_meas.k == 0:
            raise ParameterBoundError("final measurement <0| is not in the toolbox")

    def to_json(self) -> dict:
        return {
            "input_a": self.input_a.to_json(),
            "input_b": self.input_b.to_json(),
            "ops": [op.to_json() for op in self.ops],
            "final_meas": self.final_meas.to_json(),
        }

    @staticmethod
    def from_json(obj: dict) -> "Genome":
        return Genome(
            input_a=StateSpec.from_json(obj["input_a"]),
            input_b=StateSpec.from_json(obj["input_b"]),
            ops=tuple(OperatorSpec.from_json(o) for o in obj["ops"]),
            final_meas=MeasurementSpec.from_json(obj["final_meas"]),
        )

    def digest(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def structural_key(self) -> tuple:
        """Discrete shape of the circuit; continuous parameters ignored.

        Beam-splitter transmissivities are snapped to the 5%-grid the search
        samples from, so refined variants of the same structure collapse.
        """

        def input_key(spec: StateSpec):
            return (spec.kind, spec.n if spec.kind == "fock" else None)

        def meas_key(meas: MeasurementSpec):
            return (meas.kind, meas.k if meas.kind == "number" else None)

        ops_key = []
        for op in self.ops:
            if op.kind == "bs":
                ops_key.append(("bs", 5 * round(op.t_pct / 5.0)))
            elif op.kind == "measrep":
                ops_key.append(
                    ("measrep", op.mode, meas_key(op.meas), input_key(op.new_input))
                )
            elif op.kind == "id":
                ops_key.append(("id",))
            else:
                ops_key.append((op.kind, op.mode))
        return (input_key(self.input_a), input_key(self.input_b), tuple(ops_key), meas_key(self.final_meas))


@dataclass(frozen=True)
class FitnessKind:
    """Fitness selector: plain "qfi", photon-normalized "gamma", or
    "qfi_at_nbar" which damps the QFI once nbar leaves the target window."""

    kind: str = "gamma"
    target: float = 0.0
    tolerance: float = 0.0

    def __post_init__(self):
        if self.kind not in ("qfi", "gamma", "qfi_at_nbar"):
            raise ParameterBoundError(f"unknown fitness kind {self.kind!r}")
        if self.kind == "qfi_at_nbar" and (self.target <= 0 or self.tolerance <= 0):
            raise ParameterBoundError("qfi_at_nbar needs positive target and tolerance")

    def score(self, qfi: float, nbar: float) -> float:
        if self.kind == "qfi":
            return qfi
        if self.kind == "gamma":
            return qfi / nbar
        excess = abs(nbar - self.target) - self.tolerance
        if excess <= 0:
            return qfi
        return qfi * math.exp(-((excess / self.tolerance) ** 2))

    def to_json(self) -> dict:
        if self.kind == "qfi_at_nbar":
            return {"kind": self.kind, "target": self.target, "tolerance": self.tolerance}
        return {"kind": self.kind}

    @staticmethod
    def from_json(obj: dict) -> "FitnessKind":
        return FitnessKind(
            kind=obj["kind"],
            target=float(obj.get("target", 0.0)),
            tolerance=float(obj.get("tolerance", 0.0)),
        )


@dataclass(frozen=True)
class SearchConfig:
    m: int = 2
    fitness: FitnessKind = field(default_factory=FitnessKind)
    max_failed_mutations: int = 50
    max_restarts: int = 500
    herald_floor: float = 0.01
    rng_seed: int = 0
    refinement: bool = False
    init_population: int = 16
    refine_sweeps: int = 3

    def __post_init__(self):
        if self.m < M_MIN or self.m > M_MAX:
            raise ParameterBoundError(f"m = {self.m} outside [{M_MIN}, {M_MAX}]")
        if min(self.max_failed_mutations, self.max_restarts, self.init_population) < 1:
            raise ParameterBoundError("search limits must be positive")
        if not 0.0 <= self.herald_floor < 1.0:
            raise ParameterBoundError("herald_floor must lie in [0, 1)")

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "fitness": self.fitness.to_json(),
            "max_failed_mutations": self.max_failed_mutations,
            "max_restarts": self.max_restarts,
            "herald_floor": self.herald_floor,
            "rng_seed": self.rng_seed,
            "refinement": self.refinement,
            "init_population": self.init_population,
            "refine_sweeps": self.refine_sweeps,
        }

    @staticmethod
    def from_json(obj: dict) -> "SearchConfig":
        kwargs = dict(obj)
        if "fitness" in kwargs:
            kwargs["fitness"] = FitnessKind.from_json(kwargs["fitness"])
        return SearchConfig(**kwargs)


@dataclass(frozen=True)
class FitnessReport:
    """Evaluation outcome for one genome.

    herald_prob multiplies every heralding factor along the pipeline; when
    density_herald is set, a quadrature event contributed a probability
    density and the value is not a probability (and is exempt from the
    herald floor).  failure records why fitness was forced to zero.
    """

    heralded: SingleModeState | None
    herald_prob: float
    nbar: float
    qfi: float
    gamma: float
    fitness: float
    density_herald: bool = False
    failure: str | None = None

    def summary(self) -> dict:
        return {
            "fitness": self.fitness,
            "qfi": self.qfi,
            "nbar": self.nbar,
            "gamma": self.gamma,
            "herald_prob": self.herald_prob,
            "density_herald": self.density_herald,
            "failure": self.failure,
        }


@dataclass(frozen=True)
class Champion:
    genome: Genome
    report: FitnessReport
    lineage_length: int
    restart_index: int

    def to_json(self) -> dict:
        payload = {"genome": self.genome.to_json(), "genome_digest": self.genome.digest()}
        payload.update(self.report.summary())
        payload["lineage_length"] = self.lineage_length
        payload["restart_index"] = self.restart_index
        return payload


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------


def _random_input(rng: np.random.Generator) -> StateSpec:
    choice = rng.integers(5)
    if choice < 3:
        return StateSpec("fock", n=int(choice))
    if choice == 3:
        return StateSpec(
            "coherent",
            mag=float(rng.uniform(0.0, ALPHA_MAX)),
            theta_c=float(rng.uniform(0.0, TWO_PI)),
        )
    return StateSpec(
        "sv", r=float(rng.uniform(0.0, R_MAX)), theta_s=float(rng.uniform(0.0, TWO_PI))
    )


def _random_measurement(rng: np.random.Generator) -> MeasurementSpec:
    choice = rng.integers(5)
    if choice == 0:
        return MeasurementSpec(
            "quadrature",
            x=float(rng.uniform(*QUAD_X_RANGE)),
            lam=float(rng.uniform(0.0, TWO_PI)),
        )
    return MeasurementSpec("number", k=int(choice))


def _random_mode(rng: np.random.Generator) -> str:
    return "a" if rng.integers(2) == 0 else "b"


def _random_operator(rng: np.random.Generator) -> OperatorSpec:
    choice = rng.integers(5)
    if choice == 0:
        return OperatorSpec("bs", t_pct=float(rng.choice(BS_T_CHOICES)))
    if choice == 1:
        return OperatorSpec(
            "disp",
            beta_mag=float(rng.uniform(0.0, ALPHA_MAX)),
            beta_phase=float(rng.uniform(0.0, TWO_PI)),
            mode=_random_mode(rng),
        )
    if choice == 2:
        return OperatorSpec(
            "phase", theta_p=float(rng.uniform(0.0, TWO_PI)), mode=_random_mode(rng)
        )
    if choice == 3:
        return OperatorSpec("id")
    return OperatorSpec(
        "measrep",
        meas=_random_measurement(rng),
        new_input=_random_input(rng),
        mode=_random_mode(rng),
    )


def random_genome(cfg: SearchConfig, rng: np.random.Generator) -> Genome:
    return Genome(
        input_a=_random_input(rng),
        input_b=_random_input(rng),
        ops=tuple(_random_operator(rng) for _ in range(cfg.m)),
        final_meas=_random_measurement(rng),
    )


# ---------------------------------------------------------------------------
# mutation
# ---------------------------------------------------------------------------

# (location, attribute, low, high); location addresses the owning spec.
_ParamRef = tuple[tuple, str, float, float]


def _spec_params(spec, location) -> list[_ParamRef]:
    if isinstance(spec, StateSpec):
        if spec.kind == "coherent":
            return [
                (location, "mag", 0.0, ALPHA_MAX),
                (location, "theta_c", 0.0, TWO_PI),
            ]
        if spec.kind == "sv":
            return [(location, "r", 0.0, R_MAX), (location, "theta_s", 0.0, TWO_PI)]
        return []
    if isinstance(spec, MeasurementSpec):
        if spec.kind == "quadrature":
            return [
                (location, "x", QUAD_X_RANGE[0], QUAD_X_RANGE[1]),
                (location, "lam", 0.0, TWO_PI),
            ]
        return []
    if isinstance(spec, OperatorSpec):
        if spec.kind == "bs":
            return [(location, "t_pct", 5.0, 95.0)]
        if spec.kind == "disp":
            return [
                (location, "beta_mag", 0.0, ALPHA_MAX),
                (location, "beta_phase", 0.0, TWO_PI),
            ]
        if spec.kind == "phase":
            return [(location, "theta_p", 0.0, TWO_PI)]
        if spec.kind == "measrep":
            out = _spec_params(spec.meas, location + ("meas",))
            out += _spec_params(spec.new_input, location + ("new_input",))
            return out
        return []
    raise TypeError(f"unexpected spec {type(spec)}")


def continuous_params(genome: Genome) -> list[_ParamRef]:
    out = _spec_params(genome.input_a, ("input_a",))
    out += _spec_params(genome.input_b, ("input_b",))
    for i, op in enumerate(genome.ops):
        out += _spec_params(op, ("ops", i))
    out += _spec_params(genome.final_meas, ("final_meas",))
    return out


def _get_spec(genome: Genome, location: tuple):
    obj = genome
    for step in location:
        if isinstance(step, int):
            obj = obj[step]
        else:
            obj = getattr(obj, step)
    return obj


def set_param(genome: Genome, ref: _ParamRef, value: float) -> Genome:
    location, attr, _, _ = ref
    head, rest = location[0], location[1:]
    if head == "ops":
        idx, inner = rest[0], rest[1:]
        op = genome.ops[idx]
        if inner:
            nested = dataclasses.replace(getattr(op, inner[0]), **{attr: value})
            op = dataclasses.replace(op, **{inner[0]: nested})
        else:
            op = dataclasses.replace(op, **{attr: value})
        ops = genome.ops[:idx] + (op,) + genome.ops[idx + 1 :]
        return dataclasses.replace(genome, ops=ops)
    target = dataclasses.replace(getattr(genome, head), **{attr: value})
    return dataclasses.replace(genome, **{head: target})


def _reflect(value: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0:
        return lo
    t = (value - lo) % (2.0 * span)
    return lo + (t if t <= span else 2.0 * span - t)


def mutate(genome: Genome, rng: np.random.Generator) -> Genome:
    """One mutation event: nudge a continuous parameter or replace a slot."""
    params = continuous_params(genome)
    if params and rng.uniform() < 0.5:
        ref = params[rng.integers(len(params))]
        location, attr, lo, hi = ref
        current = getattr(_get_spec(genome, location), attr)
        if attr == "t_pct":
            step = 5.0 if rng.integers(2) == 0 else -5.0
            value = _reflect(current + step, 5.0, 95.0)
        else:
            value = _reflect(current + rng.normal(0.0, 0.1 * (hi - lo)), lo, hi)
        return set_param(genome, ref, value)
    slot = int(rng.integers(len(genome.ops) + 3))
    if slot == 0:
        return dataclasses.replace(genome, input_a=_random_input(rng))
    if slot == 1:
        return dataclasses.replace(genome, input_b=_random_input(rng))
    if slot == len(genome.ops) + 2:
        return dataclasses.replace(genome, final_meas=_random_measurement(rng))
    idx = slot - 2
    ops = genome.ops[:idx] + (_random_operator(rng),) + genome.ops[idx + 1 :]
    return dataclasses.replace(genome, ops=ops)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _working_dim(genome: Genome) -> int:
    specs = [genome.input_a, genome.input_b]
    n_disp = 0
    for op in genome.ops:
        if op.kind == "measrep":
            specs.append(op.new_input)
        if op.kind == "disp":
            n_disp += 1
    base = max(spec.adaptive_dim() for spec in specs)
    return min(DIM_CAP, base + DISPLACEMENT_PAD * n_disp)


def run_pipeline(genome: Genome) -> tuple[SingleModeState, float, bool]:
    """Inputs -> operators -> final measurement on mode a.

    Returns (heralded state, product of herald factors, density flag).
    Raises ZeroStateError / TruncationError like the underlying operators.
    """
    dim = _working_dim(genome)
    state = tensor(genome.input_a.build(dim), genome.input_b.build(dim))
    herald_prob = 1.0
    density = False
    for op in genome.ops:
        state, herald = op.apply(state)
        if herald is not None:
            herald_prob *= herald.prob
            density = density or herald.density
    final = project(genome.final_meas, "a", state)
    herald_prob *= final.prob
    density = density or final.density
    return trim(final.state), herald_prob, density


def _zero_report(failure: str) -> FitnessReport:
    return FitnessReport(
        heralded=None,
        herald_prob=0.0,
        nbar=0.0,
        qfi=0.0,
        gamma=0.0,
        fitness=0.0,
        failure=failure,
    )


def evaluate(genome: Genome, cfg: SearchConfig) -> FitnessReport:
    """Build the heralded state, form the pair probe, and score it."""
    try:
        heralded, herald_prob, density = run_pipeline(genome)
    except ZeroStateError:
        return _zero_report("zero_state")
    except TruncationError:
        return _zero_report("truncation")
    probe = pair_probe(heralded)
    nbar = mean_photon(probe)
    if nbar <= 1e-9:
        return _zero_report("zero_photon")
    f = qfi_pure(probe)
    gamma = f / nbar
    fitness = cfg.fitness.score(f, nbar)
    failure = None
    if not density and herald_prob < cfg.herald_floor:
        fitness = 0.0
        failure = "herald_floor"
    return FitnessReport(
        heralded=heralded,
        herald_prob=herald_prob,
        nbar=nbar,
        qfi=f,
        gamma=gamma,
        fitness=fitness,
        density_herald=density,
        failure=failure,
    )


# ---------------------------------------------------------------------------
# climbing, restarts, refinement
# ---------------------------------------------------------------------------


def hill_climb(
    cfg: SearchConfig, rng: np.random.Generator, restart_index: int = 0
) -> Champion:
    """Single restart: best-of-population parent, then accept strict improvements."""
    parent = random_genome(cfg, rng)
    parent_report = evaluate(parent, cfg)
    for _ in range(cfg.init_population - 1):
        candidate = random_genome(cfg, rng)
        report = evaluate(candidate, cfg)
        if report.fitness > parent_report.fitness:
            parent, parent_report = candidate, report
    lineage = 1
    failures = 0
    while failures < cfg.max_failed_mutations:
        child = mutate(parent, rng)
        report = evaluate(child, cfg)
        if report.fitness > parent_report.fitness:
            parent, parent_report = child, report
            lineage += 1
            failures = 0
        else:
            failures += 1
    if cfg.refinement and parent_report.fitness > 0:
        refined = refine(parent, cfg)
        refined_report = evaluate(refined, cfg)
        if refined_report.fitness > parent_report.fitness:
            parent, parent_report = refined, refined_report
            lineage += 1
    return Champion(
        genome=parent,
        report=parent_report,
        lineage_length=lineage,
        restart_index=restart_index,
    )


def run_search(cfg: SearchConfig, progress=None) -> list[Champion]:
    """Independent seeded restarts, deduplicated by structure, best first."""
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.max_restarts)
    best: dict[tuple, Champion] = {}
    for i, seed in enumerate(seeds):
        champ = hill_climb(cfg, np.random.default_rng(seed), restart_index=i)
        key = champ.genome.structural_key()
        kept = best.get(key)
        if kept is None or champ.report.fitness > kept.report.fitness:
            best[key] = champ
        if progress is not None:
            progress(i, champ)
    return sorted(
        best.values(), key=lambda c: (-c.report.fitness, c.genome.digest())
    )


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(score, lo: float, hi: float, iters: int = 28) -> tuple[float, float]:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = score(x1), score(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = score(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = score(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def refine(genome: Genome, cfg: SearchConfig) -> Genome:
    """Coordinate-wise golden-section polish of every continuous parameter.

    The structure is untouched; beam-splitter transmissivity is treated as
    continuous here.  Fitness never decreases: a coordinate move is kept
    only when it beats the incumbent.
    """
    current = genome
    current_fit = evaluate(current, cfg).fitness
    for _ in range(cfg.refine_sweeps):
        for ref in continuous_params(current):
            location, attr, lo, hi = ref

            def score(v: float) -> float:
                return evaluate(set_param(current, ref, v), cfg).fitness

            best_v, best_f = _golden_max(score, lo, hi)
            if best_f > current_fit:
                current = set_param(current, ref, best_v)
                current_fit = best_f
    return current
