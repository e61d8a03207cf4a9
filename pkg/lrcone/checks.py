"""
Verification campaign as a pipeline of steps.

Each step evaluates one family of inequalities or oracle comparisons and
records (check, point, measured, bound) rows in a shared context. A row
passes when bound - measured >= -tolerance.
"""
import abc
import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Any, List

import numpy as np
from tqdm import tqdm

from lrcone.bounds import (ConstantMode, finite_range_bound, lemma31_rhs, lemma_B1_bound,
                           lemma_B1_lhs, series_a_n, series_a_n_bound, velocity)
from lrcone.config import InteractionBlock, LatticeBlock, ObservableSpec, ObservablesBlock, RunConfig
from lrcone.emit import Table, REPORT_COLUMNS, render_csv
from lrcone.geometry import (build_chain, build_grid, ball_count, fit_growth_constant, neighborhood,
                             realized_distances, set_distance)
from lrcone.lightcone import (ConeParameters, FrontRecord, asymptotic_check, decay_rates, exponents,
                              expected_decay_rate, fit_power_law)
from lrcone.model import (admissible_power_law_profile, build_power_law_two_body, compute_C0, decompose,
                          empirical_f, verify_sr_condition, DecayProfile)
from lrcone.quantum import (HeisenbergPropagator, Observable, assemble_hamiltonian, commutator_norm, embed,
                            evolve, interaction_picture_unitary, spectral_norm, unitarity_defect,
                            verify_conjugation_identity)
from lrcone.simulate_pipe import PreparedModel, bound_inputs, prepare_model, run_sweep, sweep_table

violation_logger = logging.getLogger("lrcone.violations")

# --- Configuration ---
CONFIG = {
    "IDENTITY_TOL": 1e-9,
    "LEMMA31_SLACK": 1e-5,
    "ORACLE_TOL": 1e-12,
    "EXPONENT_TOL": 1e-12,
    "FIT_TOL": 1e-6,
    "RATE_REL_TOL": 0.01,
    "RATE_MIN_T": 10.0,
}
# --- End Configuration ---


@dataclass(frozen=True)
class CheckRow:
    check: str
    point: str
    measured: float
    bound: float
    margin: float
    passed: bool


@dataclass
class VerificationReport:
    rows: List[CheckRow]
    summary: dict[str, Any]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failed_checks(self) -> list[str]:
        return sorted({row.check for row in self.rows if not row.passed})

    def worst_failures(self) -> list[CheckRow]:
        """The failing row with the most negative margin, one per failed check."""
        worst: dict[str, CheckRow] = {}
        for row in self.rows:
            if not row.passed and (row.check not in worst or row.margin < worst[row.check].margin):
                worst[row.check] = row
        return [worst[name] for name in sorted(worst)]

    def table(self) -> Table:
        table = Table("report", REPORT_COLUMNS)
        for row in self.rows:
            table.append(row.check, row.point, row.measured, row.bound, row.margin, row.passed)
        return table


def _point(**coords) -> str:
    return " ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in coords.items())


class VerificationContext:
    """Holds the configuration, the cached chain models and the recorded rows of one campaign."""

    def __init__(self, config: RunConfig, workers: int | None = None):
        self.config = config
        self.workers = workers
        self.rows: List[CheckRow] = []
        self._models: dict[int, PreparedModel] = {}

    def record(self, check: str, point: str, measured: float, bound: float, tolerance: float | None = None):
        tol = self.config.tolerance if tolerance is None else tolerance
        margin = bound - measured
        passed = bool(margin >= -tol)
        self.rows.append(CheckRow(check=check, point=point, measured=float(measured), bound=float(bound),
                                  margin=float(margin), passed=passed))
        if not passed:
            violation_logger.warning("%s at %s: measured=%.17g bound=%.17g margin=%.6g",
                                     check, point, measured, bound, margin)

    def chain_config(self, L: int) -> RunConfig:
        """The run configuration with its lattice replaced by an open chain of L sites."""
        interaction = self.config.interaction
        if interaction.type != "power_law_two_body":
            interaction = InteractionBlock(type="power_law_two_body", C1=1.0, alpha=2.0)
        interaction = interaction.model_copy(update={"D": 1.0})
        observables = ObservablesBlock(A=ObservableSpec(kind=self._kind("A"), site=0),
                                       B=ObservableSpec(kind=self._kind("B")))
        return self.config.model_copy(update={"lattice": LatticeBlock(kind="chain", size=L),
                                              "interaction": interaction, "observables": observables})

    def _kind(self, name: str) -> str:
        kind = getattr(self.config.observables, name).kind
        return "x" if kind == "explicit" else kind

    def model_for(self, L: int) -> PreparedModel:
        if L not in self._models:
            config = self.chain_config(L)
            self._models[L] = prepare_model(config)
        return self._models[L]

    def observables(self, model: PreparedModel, y: int) -> tuple[Observable, Observable]:
        """A on site 0 and B on site y, with the configured Pauli kinds (x for explicit operators)."""
        return Observable.pauli(self._kind("A"), 0), Observable.pauli(self._kind("B"), y)


class VerificationStep(abc.ABC):
    """A single suite of the verification campaign."""
    name: str

    @abc.abstractmethod
    def process(self, context: VerificationContext):
        pass


class GeometryStep(VerificationStep):
    name = "geometry"

    def process(self, context: VerificationContext):
        spaces = [build_chain(L) for L in context.config.verify.identity_sizes] + [build_grid(2, 3)]
        for space in spaces:
            D = 1.0 if space.kind == "chain" else 2.0
            cert = fit_growth_constant(space, D)
            worst = max(ball_count(space, x, r) / cert.g(r) for x in space.sites for r in realized_distances(space))
            context.record("growth_certificate", _point(kind=space.kind, n=space.n_sites), worst, 1.0)
            for x in space.sites:
                for r in realized_distances(space):
                    size = len(neighborhood(space, [x], float(r)))
                    context.record("neighborhood_volume", _point(n=space.n_sites, x=x, r=float(r)),
                                   size, cert.g(float(r)))
        C = fit_growth_constant(build_chain(7), 1.0).C
        context.record("growth_fit_oracle", "chain L=7 D=1", abs(C - 1.75), CONFIG["ORACLE_TOL"], tolerance=0.0)


class AssumptionAStep(VerificationStep):
    """empirical_f and compute_C0 against loops written from the raw definitions."""
    name = "assumption_a"

    @staticmethod
    def _raw_f(interaction, R: float) -> float:
        best = 0.0
        for x in range(interaction.space.n_sites):
            total = 0.0
            for term in interaction.terms:
                diam = max(abs(int(a) - int(b)) for a in term.support for b in term.support)
                if x in term.support and diam >= R:
                    total += np.linalg.norm(term.matrix, 2)
            best = max(best, total)
        return best

    @staticmethod
    def _raw_C0(interaction) -> float:
        n = interaction.space.n_sites
        best = 0.0
        for x in range(n):
            total = 0.0
            for y in range(n):
                for term in interaction.terms:
                    if x in term.support and y in term.support:
                        total += np.linalg.norm(term.matrix, 2)
            best = max(best, total)
        return best

    def process(self, context: VerificationContext):
        model = context.model_for(5)
        interaction = model.interaction
        for R in (0.0, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0):
            context.record("assumption_a_oracle", _point(quantity="f", R=R),
                           abs(empirical_f(interaction, R) - self._raw_f(interaction, R)), CONFIG["ORACLE_TOL"],
                           tolerance=0.0)
            _, long = decompose(interaction, R) if R > 0 else (None, interaction)
            holds = verify_sr_condition(long, DecayProfile.empirical(interaction), R)
            context.record("sr_condition", _point(R=R), 0.0 if holds else 1.0, 0.0, tolerance=0.0)
        C0 = compute_C0(interaction)
        context.record("assumption_a_oracle", "quantity=C0", abs(C0 - self._raw_C0(interaction)),
                       CONFIG["ORACLE_TOL"], tolerance=0.0)
        context.record("assumption_a_ordering", "C0 >= f(0)", empirical_f(interaction, 0.0), C0)
        alpha = context.chain_config(5).interaction.alpha
        profile = admissible_power_law_profile(interaction, alpha)
        context.record("power_law_profile", _point(C_prime=profile.C_prime),
                       0.0 if profile.dominates(interaction) else 1.0, 0.0, tolerance=0.0)


class QuantumPropertiesStep(VerificationStep):
    """Unitarity, group law and the generic commutator bound on seeded random operators."""
    name = "quantum_properties"

    def process(self, context: VerificationContext):
        model = context.model_for(context.config.verify.identity_sizes[0])
        H = assemble_hamiltonian(model.interaction, cap=model.hilbert.total_dim)
        rng = np.random.default_rng(context.config.seed)
        dim = H.dim
        tol = CONFIG["IDENTITY_TOL"]
        for sample in range(context.config.verify.quantum_samples):
            A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            s, t = rng.uniform(0.0, 2.0, size=2)
            normA, normB = spectral_norm(A), spectral_norm(B)
            evolved = evolve(H, A, t)
            context.record("unitarity", _point(sample=sample, t=float(t)),
                           abs(spectral_norm(evolved) - normA) / normA, tol, tolerance=0.0)
            group = spectral_norm(evolve(H, evolve(H, A, s), t) - evolve(H, A, s + t)) / normA
            context.record("group_law", _point(sample=sample, s=float(s), t=float(t)), group, tol, tolerance=0.0)
            context.record("generic_commutator_bound", _point(sample=sample, t=float(t)),
                           commutator_norm(evolved, B), 2.0 * normA * normB + tol, tolerance=0.0)


class ConjugationIdentityStep(VerificationStep):
    name = "conjugation_identity"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        for L in verify.identity_sizes:
            model = context.model_for(L)
            A, B = context.observables(model, L - 1)
            A_full, B_full = embed(A, model.hilbert), embed(B, model.hilbert)
            H_full = assemble_hamiltonian(model.interaction, cap=model.hilbert.total_dim)
            for R in verify.identity_R:
                short, _ = decompose(model.interaction, R)
                H_short = assemble_hamiltonian(short, cap=model.hilbert.total_dim)
                for t in verify.identity_t:
                    point = _point(L=L, R=R, t=t)
                    residual = verify_conjugation_identity(H_short, H_full, A_full, B_full, t)
                    context.record("conjugation_identity", point, residual, CONFIG["IDENTITY_TOL"], tolerance=0.0)
                    U = interaction_picture_unitary(H_short, H_full, t)
                    context.record("interaction_unitary", point, unitarity_defect(U), CONFIG["IDENTITY_TOL"],
                                   tolerance=0.0)


class FiniteRangeStep(VerificationStep):
    """The truncated dynamics against 2||A|| ||B|| |X| e^(vt - d/R)."""
    name = "finite_range_bound"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        L, R = verify.finite_range_size, verify.finite_range_R
        model = context.model_for(L)
        short, _ = decompose(model.interaction, R)
        v = model.velocity_at(R)
        H_short = assemble_hamiltonian(short, cap=model.hilbert.total_dim)
        A, _ = context.observables(model, 1)
        propagator = HeisenbergPropagator(H_short, embed(A, model.hilbert))
        for t in verify.finite_range_t:
            A_t = propagator.at(t)
            for y in range(1, L):
                _, B = context.observables(model, y)
                d = set_distance(model.space, A.support, B.support)
                measured = commutator_norm(A_t, embed(B, model.hilbert))
                bound = finite_range_bound(A.norm, B.norm, len(A.support), d, R, v, t)
                context.record(self.name, _point(L=L, R=R, t=t, y=y), measured, bound)


class Lemma31Step(VerificationStep):
    """Full dynamics against the quadrature-evaluated Duhamel right-hand side."""
    name = "lemma31"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        L, R = verify.lemma_size, verify.lemma_R
        model = context.model_for(L)
        short, long = decompose(model.interaction, R)
        H_full = assemble_hamiltonian(model.interaction, cap=model.hilbert.total_dim)
        H_short = assemble_hamiltonian(short, cap=model.hilbert.total_dim)
        A, _ = context.observables(model, 1)
        A_full = embed(A, model.hilbert)
        full = HeisenbergPropagator(H_full, A_full)
        for t in verify.lemma_t:
            A_t = full.at(t)
            for r in verify.lemma_r:
                for y in range(1, L):
                    _, B = context.observables(model, y)
                    B_full = embed(B, model.hilbert)
                    evaluation = lemma31_rhs(H_short, long, A_full, B_full, A.support, r, t,
                                             context.config.bound.quadrature_tol, model.hilbert)
                    context.record(self.name, _point(L=L, R=R, r=r, t=t, y=y), commutator_norm(A_t, B_full),
                                   evaluation.upper(CONFIG["LEMMA31_SLACK"]))


class LemmaB1Step(VerificationStep):
    """The far long-range commutator sum against both constant modes."""
    name = "lemma_B1"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        L, R = verify.lemma_size, verify.lemma_R
        config = context.chain_config(L)
        model = context.model_for(L)
        short, long = decompose(model.interaction, R)
        H_short = assemble_hamiltonian(short, cap=model.hilbert.total_dim)
        A, _ = context.observables(model, 1)
        A_full = embed(A, model.hilbert)
        for t in verify.lemma_t:
            for r in verify.lemma_r:
                point = _point(L=L, R=R, r=r, t=t)
                lhs = lemma_B1_lhs(H_short, long, A_full, A.support, r, t, model.hilbert)
                inputs = bound_inputs(config, model, A.norm, 1.0, A.support, t, r, R)
                tight = lemma_B1_bound(inputs, ConstantMode.NUMERIC_TIGHT)
                paper = lemma_B1_bound(inputs, ConstantMode.PAPER_FORM)
                context.record(self.name, point + " mode=numeric_tight", lhs, tight)
                context.record(self.name, point + " mode=paper_form", lhs, paper)
                context.record(self.name, point + " mode_ordering", tight, paper)


class TheoremStep(VerificationStep):
    """The three-term bound over full sweeps, both R policies and both constant modes."""
    name = "theorem_bound_domination"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        policies = ["fixed"]
        alpha = context.chain_config(2).interaction.alpha
        if alpha > 1.0:
            policies.append("kappa_rule")
        for L, policy in itertools.product(verify.theorem_sizes, policies):
            base = context.chain_config(L)
            config = base.model_copy(update={
                "sweep": base.sweep.model_copy(update={"t_grid": list(verify.theorem_t), "b_sites": None,
                                                       "r_grid": None, "R_policy": policy,
                                                       "R_values": list(verify.theorem_R)}),
                "bound": base.bound.model_copy(update={"constant_mode": "both"}),
            })
            rows = run_sweep(config, workers=context.workers, progress=False, model=context.model_for(L))
            by_point: dict[tuple, dict[str, float]] = {}
            for row in rows:
                point = _point(L=L, policy=policy, t=row.t, r=row.r, R=row.R, y=row.y)
                context.record(self.name, f"{point} mode={row.mode}", row.measured, row.bound.total)
                if row.mode == ConstantMode.NUMERIC_TIGHT.value:
                    context.record("theorem_term1_domination", point, row.truncated, row.bound.term1)
                by_point.setdefault(point, {})[row.mode] = row.bound.total
            for point, totals in by_point.items():
                context.record(self.name, f"{point} mode_ordering", totals["numeric_tight"], totals["paper_form"])


class SeriesStep(VerificationStep):
    """Brute-force a_n against C0^n |X| and its vanishing below n R = d(X,Y)."""
    name = "series_a_n"

    def process(self, context: VerificationContext):
        config = context.config
        max_chains = config.limits.max_chains
        for L in range(3, config.limits.series_max_sites + 1):
            model = context.model_for(L)
            C0 = compute_C0(model.interaction)
            for R in config.verify.series_R:
                short, _ = decompose(model.interaction, R)
                for x, y in itertools.permutations(model.space.sites, 2):
                    d = model.space.dist(x, y)
                    for n in range(1, config.limits.series_max_n + 1):
                        a_n = series_a_n(short, [x], [y], R, n, max_chains)
                        point = _point(L=L, R=R, x=x, y=y, n=n)
                        context.record("series_a_n_bound", point, a_n, C0 ** n)
                        if n * R < d:
                            context.record("series_a_n_vanishing", point, a_n,
                                           series_a_n_bound(C0, 1, n, R, d), tolerance=0.0)

        worked = build_power_law_two_body(build_chain(3), 1.0, 2.0, 1.0)
        expected = [(1, 2.5, 1.0 / 27.0), (1, 1.5, 0.0), (2, 1.5, 1.0 / 64.0)]
        for n, R, value in expected:
            short, _ = decompose(worked, R)
            a_n = series_a_n(short, [0], [2], R, n, max_chains)
            context.record("series_worked_example", _point(n=n, R=R), abs(a_n - value), CONFIG["ORACLE_TOL"],
                           tolerance=0.0)


class LightconeFormulaStep(VerificationStep):
    name = "lightcone_formula"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        for D in (1.0, 2.0, 3.0):
            for alpha in np.arange(D + 0.5, D + 10.0 + 1e-9, 0.5):
                e = exponents(D, float(alpha))
                context.record("exponent_identity", _point(D=D, alpha=float(alpha)),
                               abs(1.0 / e.eta - (1.0 + e.gamma)), CONFIG["EXPONENT_TOL"], tolerance=0.0)
                context.record("kappa_below_one", _point(D=D, alpha=float(alpha)), e.kappa, 1.0)

        model = context.model_for(context.config.verify.lemma_size)
        alpha = context.chain_config(2).interaction.alpha
        params = ConeParameters.from_model(1.0, alpha, context.config.bound.lam, velocity(model.C0))
        front = [FrontRecord(t=t, r_star=params.r_max(t), epsilon=1.0) for t in verify.lightcone_t]
        fit = fit_power_law(front)
        context.record("r_max_fit", _point(points=fit.points_used), abs(fit.exponent - (1.0 + params.gamma)),
                       CONFIG["FIT_TOL"], tolerance=0.0)

        profile = admissible_power_law_profile(model.interaction, alpha)
        rows = asymptotic_check(params, verify.lightcone_t, model.growth, model.shell_growth, profile.C_prime)
        expected = expected_decay_rate(params)
        for t, rate1, rate3 in decay_rates(rows):
            if t < CONFIG["RATE_MIN_T"]:
                continue
            for label, rate in (("term1", rate1), ("term3", rate3)):
                context.record("asymptotic_decay_rate", _point(term=label, t=t),
                               abs(rate - expected) / abs(expected), CONFIG["RATE_REL_TOL"], tolerance=0.0)
        last = rows[-1]
        context.record("asymptotic_term2_limit", _point(t=last.t),
                       abs(math.exp(last.log_term2) - last.term2_limit) / last.term2_limit, CONFIG["RATE_REL_TOL"],
                       tolerance=0.0)


class DeterminismStep(VerificationStep):
    """Byte-identical sweep CSV across repeated runs and worker counts."""
    name = "determinism"

    def process(self, context: VerificationContext):
        verify = context.config.verify
        config = context.chain_config(verify.determinism_size)
        model = context.model_for(verify.determinism_size)
        reference = render_csv(sweep_table(run_sweep(config, workers=verify.determinism_workers[0],
                                                     progress=False, model=model)))
        for workers in verify.determinism_workers:
            text = render_csv(sweep_table(run_sweep(config, workers=workers, progress=False, model=model)))
            context.record(self.name, _point(workers=workers), 0.0 if text == reference else 1.0, 0.0,
                           tolerance=0.0)


class VerificationPipeline:
    def __init__(self, steps: List[VerificationStep]):
        self.steps = steps

    @classmethod
    def get_default_pipeline(cls) -> 'VerificationPipeline':
        steps: List[VerificationStep] = [
            GeometryStep(),
            AssumptionAStep(),
            QuantumPropertiesStep(),
            ConjugationIdentityStep(),
            FiniteRangeStep(),
            Lemma31Step(),
            LemmaB1Step(),
            TheoremStep(),
            SeriesStep(),
            LightconeFormulaStep(),
            DeterminismStep(),
        ]
        return cls(steps)

    def run(self, config: RunConfig, workers: int | None = None, progress: bool = True) -> VerificationReport:
        context = VerificationContext(config, workers)
        started = time.perf_counter()
        with tqdm(total=len(self.steps), desc="Verifying", unit="suite", disable=not progress) as pbar:
            for step in self.steps:
                pbar.set_description(f"Verifying {step.name}")
                step.process(context)
                failed = sum(1 for row in context.rows if not row.passed)
                pbar.update(1)
                pbar.set_postfix(rows=len(context.rows), failed=failed)
        rows = context.rows
        failed = [row for row in rows if not row.passed]
        summary = {
            "checks": len(rows),
            "passed": len(rows) - len(failed),
            "failed": len(failed),
            "failed_checks": sorted({row.check for row in failed}),
            "min_margin": min((row.margin for row in rows), default=0.0),
            "wall_time_s": time.perf_counter() - started,
        }
        return VerificationReport(rows=rows, summary=summary)
