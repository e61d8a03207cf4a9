"""
Theorem sweeps: exact commutator norms against the three-term bound on a
(t, B-site, R) grid, plus the analytic-only tables behind the `model` and
`bound` subcommands.
"""
import logging
import os
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from tqdm import tqdm

from lrcone.bounds import (BoundBreakdown, BoundInputs, ConstantMode, shell_sum_S, theorem_bound, velocity)
from lrcone.config import RunConfig
from lrcone.emit import Table, SWEEP_COLUMNS, BOUND_COLUMNS, ASSUMPTION_A_COLUMNS, emit
from lrcone.errors import InvalidArgumentError, NumericFailureError
from lrcone.geometry import (GrowthCertificate, MetricSpace, fit_growth_constant, fit_shell_constant,
                             set_distance, realized_distances)
from lrcone.lightcone import exponents
from lrcone.model import (DecayProfile, Interaction, admissible_power_law_profile, compute_C0, decompose,
                          max_diameter)
from lrcone.quantum import (HeisenbergPropagator, HilbertSpace, Observable, assemble_hamiltonian,
                            commutator_norm, embed)

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG = {
    "MAX_WORKERS": os.cpu_count() or 1,
    "DIST_MATCH_TOL": 1e-9,
}
# --- End Configuration ---


@dataclass(frozen=True, eq=False)
class PreparedModel:
    """Everything a sweep needs from the lattice and interaction, computed once."""
    space: MetricSpace
    interaction: Interaction
    D: float
    growth: GrowthCertificate
    shell_growth: GrowthCertificate
    profile: DecayProfile
    C0: float
    truncated_C0: bool = False
    dim_cap: int | None = None

    @cached_property
    def hilbert(self) -> HilbertSpace:
        return HilbertSpace.for_interaction(self.interaction, cap=self.dim_cap)

    def f(self, R: float) -> float:
        return self.profile.f(R)

    def velocity_at(self, R: float) -> float:
        """v = 2e C0, with C0 taken from the short part when truncated_C0 is set."""
        if not self.truncated_C0:
            return velocity(self.C0)
        short, _ = decompose(self.interaction, R)
        return velocity(compute_C0(short))


def prepare_model(config: RunConfig, space: MetricSpace | None = None) -> PreparedModel:
    space = space or config.lattice.build()
    D = config.dimension
    interaction = config.interaction.build(space, D)
    if config.bound.profile == "power_law":
        alpha = config.interaction.alpha
        if config.bound.C_prime is None:
            profile = admissible_power_law_profile(interaction, alpha)
        else:
            profile = DecayProfile.power_law(config.bound.C_prime, alpha)
            if not profile.dominates(interaction):
                logger.warning("C'=%s does not dominate the empirical tail; bounds may fail.", config.bound.C_prime)
    else:
        profile = DecayProfile.empirical(interaction)
    return PreparedModel(
        space=space,
        interaction=interaction,
        D=D,
        growth=fit_growth_constant(space, D),
        shell_growth=fit_shell_constant(space, max(D - 1.0, 0.0)),
        profile=profile,
        C0=compute_C0(interaction),
        truncated_C0=config.bound.truncated_C0,
        dim_cap=config.limits.dim_cap,
    )


@dataclass(frozen=True)
class SweepRow:
    t: float
    r: float
    R: float
    y: int
    measured: float
    truncated: float
    bound: BoundBreakdown

    @property
    def mode(self) -> str:
        return self.bound.constant_mode.value

    @property
    def margin(self) -> float:
        return self.bound.total - self.measured

    def sort_key(self):
        return self.t, self.r, self.R, self.y, self.mode


@dataclass
class SweepPlan:
    """Observables and B-sites of a sweep, resolved against a prepared model."""
    model: PreparedModel
    A: Observable
    B_by_site: dict[int, Observable]
    distances: dict[int, float]

    @property
    def X(self) -> tuple[int, ...]:
        return self.A.support


def plan_sweep(config: RunConfig, model: PreparedModel) -> SweepPlan:
    A = config.observables.A.build()
    X = A.support
    spec = config.observables.B
    if spec.kind == "explicit":
        B = spec.build()
        B_by_site = {min(B.support): B}
        distances = {min(B.support): set_distance(model.space, X, B.support)}
    else:
        if config.sweep.b_sites is not None:
            sites = config.sweep.b_sites
        elif spec.site is not None:
            sites = [spec.site]
        else:
            sites = [y for y in model.space.sites if y not in X]
        B_by_site = {y: spec.build(site=y) for y in sites}
        distances = {y: set_distance(model.space, X, [y]) for y in sites}

    if config.sweep.r_grid is not None:
        wanted = config.sweep.r_grid
        distances = {y: d for y, d in distances.items()
                     if any(abs(d - r) <= CONFIG["DIST_MATCH_TOL"] for r in wanted)}
        B_by_site = {y: B_by_site[y] for y in distances}
    if not B_by_site:
        raise InvalidArgumentError("The sweep selects no B sites")
    return SweepPlan(model=model, A=A, B_by_site=B_by_site, distances=distances)


def cutoffs_for(config: RunConfig, model: PreparedModel, r: float) -> list[float]:
    """R values at separation r: the fixed list, or R = max(1, r^kappa)."""
    if config.sweep.R_policy == "fixed":
        return list(config.sweep.R_values)
    kappa = exponents(model.D, config.interaction.alpha).kappa
    return [max(1.0, r ** kappa)]


def bound_inputs(config: RunConfig, model: PreparedModel, normA: float, normB: float, X, t: float,
                 r: float, R: float, shell_cache: dict | None = None) -> BoundInputs:
    refined = config.bound.refined_exponent
    key = (r, R)
    if shell_cache is not None and key in shell_cache:
        S = shell_cache[key]
    else:
        S = shell_sum_S(model.space, model.shell_growth if refined else model.growth, r, R,
                        sites=X, mode="numeric", refined=refined)
        if shell_cache is not None:
            shell_cache[key] = S
    return BoundInputs(
        normA=normA, normB=normB, sizeX=len(X), t=t, r=r, R=R,
        v=model.velocity_at(R), f_of_R=model.f(R), growth=model.growth,
        refined_exponent=refined, shell_sum=S, shell_growth=model.shell_growth,
        C2_override=config.bound.C2_override, tight_time_factor=config.bound.tight_time_factor,
    )


def _sweep_task(config: RunConfig, plan: SweepPlan, H_full, A_full: np.ndarray, R: float,
                sites: list[int]) -> list[SweepRow]:
    model = plan.model
    short, _ = decompose(model.interaction, R)
    H_short = assemble_hamiltonian(short, cap=model.hilbert.total_dim)
    full = HeisenbergPropagator(H_full, A_full)
    truncated = HeisenbergPropagator(H_short, A_full)
    B_full = {y: embed(plan.B_by_site[y], model.hilbert) for y in sites}
    modes = [ConstantMode(m) for m in config.bound.modes]
    method = config.bound.norm_method
    shell_cache: dict = {}
    rows = []
    for t in config.sweep.t_grid:
        try:
            A_t = full.at(t)
            A_t_short = truncated.at(t)
            for y in sites:
                measured = commutator_norm(A_t, B_full[y], method)
                truncated_norm = commutator_norm(A_t_short, B_full[y], method)
                inputs = bound_inputs(config, model, plan.A.norm, plan.B_by_site[y].norm, plan.X, t,
                                      plan.distances[y], R, shell_cache)
                for mode in modes:
                    rows.append(SweepRow(t=t, r=plan.distances[y], R=R, y=y, measured=measured,
                                         truncated=truncated_norm, bound=theorem_bound(inputs, mode)))
        except NumericFailureError as e:
            raise NumericFailureError(e.args[0], {**e.diagnostics, "t": t, "R": R}) from e
    return rows


def run_sweep(config: RunConfig, workers: int | None = None, progress: bool = True,
              model: PreparedModel | None = None) -> list[SweepRow]:
    """
    Evaluates measured and bounded commutator norms on the sweep grid.

    One task per cutoff R covers every time and every B-site sharing that R;
    tasks run on a thread pool and rows are sorted by (t, r, R, site, mode).
    """
    model = model or prepare_model(config)
    plan = plan_sweep(config, model)
    H_full = assemble_hamiltonian(model.interaction, cap=model.hilbert.total_dim)
    A_full = embed(plan.A, model.hilbert)

    groups: dict[float, list[int]] = defaultdict(list)
    for y, r in plan.distances.items():
        for R in cutoffs_for(config, model, r):
            groups[R].append(y)

    rows: list[SweepRow] = []
    total_points = sum(len(sites) for sites in groups.values()) * len(config.sweep.t_grid)
    with ThreadPoolExecutor(max_workers=workers or CONFIG["MAX_WORKERS"]) as executor, \
            tqdm(total=total_points, desc="Sweeping", unit="pt", disable=not progress) as pbar:
        futures = {executor.submit(_sweep_task, config, plan, H_full, A_full, R, sorted(sites)): R
                   for R, sites in sorted(groups.items())}
        for future in as_completed(futures):
            task_rows = future.result()
            rows.extend(task_rows)
            pbar.update(len(task_rows) // max(len(config.bound.modes), 1))
            pbar.set_postfix(rows=len(rows))
    rows.sort(key=SweepRow.sort_key)
    return rows


def sweep_table(rows: list[SweepRow]) -> Table:
    table = Table("sweep", SWEEP_COLUMNS)
    for row in rows:
        b = row.bound
        table.append(row.t, row.r, row.R, row.measured, row.truncated, b.term1, b.term2, b.term3, b.total,
                     row.mode, row.margin)
    return table


def analytic_bounds(config: RunConfig, model: PreparedModel | None = None) -> Table:
    """Three-term bounds without dynamics, over the t-grid and the sweep's separations."""
    model = model or prepare_model(config)
    A = config.observables.A.build()
    X = A.support
    if config.sweep.r_grid is not None:
        r_values = list(config.sweep.r_grid)
    else:
        plan = plan_sweep(config, model)
        r_values = sorted(set(plan.distances.values()))
    B = config.observables.B
    normB = B.build().norm if B.kind == "explicit" else Observable.pauli(B.kind, 0).norm
    table = Table("bounds", BOUND_COLUMNS)
    shell_cache: dict = {}
    for t in config.sweep.t_grid:
        for r in r_values:
            for R in cutoffs_for(config, model, r):
                inputs = bound_inputs(config, model, A.norm, normB, X, t, r, R, shell_cache)
                for mode in config.bound.modes:
                    b = theorem_bound(inputs, ConstantMode(mode))
                    table.append(t, r, R, b.term1, b.term2, b.term3, b.total, b.constant_mode.value)
    return table


def assumption_a_table(model: PreparedModel) -> Table:
    """f(R) over the realized distances and one step past the largest diameter."""
    grid = [float(d) for d in realized_distances(model.space)]
    grid.append(max_diameter(model.interaction) + 1.0)
    table = Table("assumption_a", ASSUMPTION_A_COLUMNS)
    for R in sorted(set(grid)):
        table.append(R, model.f(R))
    return table


def main(config: RunConfig, workers: int | None = None, out_dir: str | None = None, progress: bool = True) -> int:
    out_dir = out_dir or config.output.directory
    model = prepare_model(config)
    print(f"Sweeping {model.space.n_sites} sites (Hilbert dimension {model.hilbert.total_dim}), "
          f"C0={model.C0:.6g}, v={velocity(model.C0):.6g}")
    started = time.perf_counter()
    rows = run_sweep(config, workers=workers, progress=progress, model=model)
    emit(sweep_table(rows), config.output.formats, out_dir)
    violations = [row for row in rows if row.margin < -config.tolerance]

    print("\n--- Sweep Complete ---")
    print(f"✅ Evaluated {len(rows)} rows in {time.perf_counter() - started:.1f}s.")
    print(f"   Minimum margin: {min(row.margin for row in rows):.6g}")
    if violations:
        print(f"❌ {len(violations)} rows exceed the bound. First: t={violations[0].t}, r={violations[0].r}, "
              f"R={violations[0].R}, mode={violations[0].mode}, margin={violations[0].margin:.6g}")
    print(f"   Results written to: {out_dir}")
    print("-----------------------")
    return 1 if violations else 0
