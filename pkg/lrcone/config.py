"""
Run configuration: one JSON document validated by pydantic models.

Unknown keys are rejected everywhere. `emit_config` writes the canonical form
that `parse_config` reads back to an equal object.
"""
import json
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from lrcone.errors import ConfigParseError, ConfigValidationError
from lrcone.geometry import MetricSpace, build_chain, build_grid, build_custom
from lrcone.model import Interaction, InteractionTerm, build_power_law_two_body
from lrcone.quantum import Observable

# --- Configuration ---
CONFIG = {
    "DEFAULT_T_GRID": {"start": 0.0, "stop": 2.0, "step": 0.1},
    "GRID_DECIMALS": 12,
}
# --- End Configuration ---


def expand_grid(spec: dict) -> list[float]:
    """{start, stop, step} -> [start, start+step, ..., stop] (stop included when hit)."""
    start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, CONFIG["GRID_DECIMALS"]) for k in range(max(count, 0))]


def _strictly_increasing(values: list[float] | None, name: str) -> list[float] | None:
    if values is None:
        return None
    if not values:
        raise ValueError(f"{name} must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    return values


def _complex_matrix(entries: list[list[tuple[float, float]]]) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in entries], dtype=complex)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class LatticeBlock(StrictModel):
    kind: Literal["chain", "grid", "custom"] = "chain"
    size: int | None = Field(default=None, ge=1)
    dimension: int | None = Field(default=None, ge=1)
    side: int | None = Field(default=None, ge=1)
    distances: list[list[float]] | None = None
    labels: list[Any] | None = None

    def build(self, size: int | None = None) -> MetricSpace:
        if self.kind == "chain":
            return build_chain(size or self.size)
        if self.kind == "grid":
            return build_grid(self.dimension, self.side)
        return build_custom(self.distances, self.labels)

    @property
    def natural_dimension(self) -> int | None:
        return {"chain": 1, "grid": self.dimension}.get(self.kind)


class ExplicitTerm(StrictModel):
    support: list[int]
    matrix: list[list[tuple[float, float]]]


class InteractionBlock(StrictModel):
    type: Literal["power_law_two_body", "explicit"] = "power_law_two_body"
    C1: float = Field(default=1.0, gt=0)
    alpha: float | None = Field(default=None, gt=0)
    D: float | None = Field(default=None, gt=0)
    pattern: Literal["ising", "xx", "xy", "heisenberg"] = "ising"
    local_dim: int = Field(default=2, ge=2)
    terms: list[ExplicitTerm] | None = None

    def build(self, space: MetricSpace, D: float) -> Interaction:
        if self.type == "power_law_two_body":
            return build_power_law_two_body(space, self.C1, self.alpha, D, self.pattern)
        terms = [InteractionTerm.from_matrix(t.support, _complex_matrix(t.matrix)) for t in self.terms or []]
        return Interaction(space=space, local_dims=(self.local_dim,) * space.n_sites, terms=tuple(terms))


class ObservableSpec(StrictModel):
    kind: Literal["x", "y", "z", "i", "explicit"] = "x"
    site: int | None = Field(default=None, ge=0)
    support: list[int] | None = None
    matrix: list[list[tuple[float, float]]] | None = None

    def build(self, site: int | None = None) -> Observable:
        if self.kind == "explicit":
            return Observable.from_matrix(self.support, _complex_matrix(self.matrix))
        return Observable.pauli(self.kind, self.site if site is None else site)


class ObservablesBlock(StrictModel):
    A: ObservableSpec = Field(default_factory=lambda: ObservableSpec(kind="x", site=0))
    B: ObservableSpec = Field(default_factory=lambda: ObservableSpec(kind="x"))


class SweepBlock(StrictModel):
    t_grid: list[float] = Field(default_factory=lambda: expand_grid(CONFIG["DEFAULT_T_GRID"]))
    b_sites: list[int] | None = None
    r_grid: list[float] | None = None
    R_policy: Literal["fixed", "kappa_rule"] = "fixed"
    R_values: list[float] = Field(default_factory=lambda: [1.5])

    @field_validator("t_grid", mode="before")
    @classmethod
    def _expand_t_grid(cls, value):
        if isinstance(value, dict):
            return expand_grid(value)
        return value

    @field_validator("t_grid")
    @classmethod
    def _check_t_grid(cls, value):
        if any(t < 0 for t in value):
            raise ValueError("times must be nonnegative")
        return _strictly_increasing(value, "t_grid")

    @field_validator("r_grid", "R_values")
    @classmethod
    def _check_grids(cls, value, info):
        return _strictly_increasing(value, info.field_name)

    @field_validator("b_sites")
    @classmethod
    def _check_sites(cls, value):
        if value is not None and (not value or len(set(value)) != len(value)):
            raise ValueError("b_sites must be a nonempty list of distinct sites")
        return value


class BoundBlock(StrictModel):
    constant_mode: Literal["paper_form", "numeric_tight", "both"] = "numeric_tight"
    profile: Literal["empirical", "power_law"] = "empirical"
    C_prime: float | None = Field(default=None, gt=0)
    lam: float = Field(default=4.0, gt=1, alias="lambda")
    refined_exponent: bool = False
    C2_override: float | None = Field(default=None, ge=0)
    tight_time_factor: bool = False
    truncated_C0: bool = False
    quadrature_tol: float = Field(default=1e-6, gt=0)
    norm_method: Literal["svd", "power"] = "svd"
    epsilon: float | None = Field(default=None, gt=0)

    @property
    def modes(self) -> list[str]:
        if self.constant_mode == "both":
            return ["numeric_tight", "paper_form"]
        return [self.constant_mode]


class OutputBlock(StrictModel):
    directory: str = "results"
    formats: list[Literal["csv", "json", "plotdata"]] = Field(default_factory=lambda: ["csv"])


class LimitsBlock(StrictModel):
    dim_cap: int | None = Field(default=None, ge=1)
    max_chains: int = Field(default=1_000_000, ge=1)
    series_max_sites: int = Field(default=5, ge=2)
    series_max_n: int = Field(default=3, ge=1)


class VerifyBlock(StrictModel):
    """Campaign sizes; defaults are the full acceptance sizes."""
    identity_sizes: list[int] = Field(default_factory=lambda: [4, 5, 6])
    identity_R: list[float] = Field(default_factory=lambda: [1.5, 2.5])
    identity_t: list[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0])
    finite_range_size: int = Field(default=8, ge=2)
    finite_range_R: float = Field(default=1.5, gt=0)
    finite_range_t: list[float] = Field(default_factory=lambda: expand_grid(CONFIG["DEFAULT_T_GRID"]))
    lemma_size: int = Field(default=6, ge=3)
    lemma_R: float = Field(default=1.5, ge=1)
    lemma_r: list[float] = Field(default_factory=lambda: [1.0, 2.0])
    lemma_t: list[float] = Field(default_factory=lambda: [0.5, 1.0])
    theorem_sizes: list[int] = Field(default_factory=lambda: [6, 8])
    theorem_t: list[float] = Field(default_factory=lambda: expand_grid(CONFIG["DEFAULT_T_GRID"]))
    theorem_R: list[float] = Field(default_factory=lambda: [1.5])
    series_R: list[float] = Field(default_factory=lambda: [1.5, 2.5, 3.5])
    quantum_samples: int = Field(default=4, ge=1)
    lightcone_t: list[float] = Field(default_factory=lambda: [float(t) for t in range(1, 101)])
    determinism_size: int = Field(default=6, ge=2)
    determinism_workers: list[int] = Field(default_factory=lambda: [1, 4])

    @field_validator("identity_R", "identity_t", "finite_range_t", "lemma_r", "lemma_t", "theorem_t",
                     "theorem_R", "series_R", "lightcone_t")
    @classmethod
    def _check_grids(cls, value, info):
        return _strictly_increasing(value, info.field_name)


class RunConfig(StrictModel):
    lattice: LatticeBlock
    interaction: InteractionBlock
    observables: ObservablesBlock = Field(default_factory=ObservablesBlock)
    sweep: SweepBlock = Field(default_factory=SweepBlock)
    bound: BoundBlock = Field(default_factory=BoundBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)
    limits: LimitsBlock = Field(default_factory=LimitsBlock)
    verify: VerifyBlock = Field(default_factory=VerifyBlock)
    seed: int = 0
    tolerance: float = Field(default=1e-9, ge=0)

    @property
    def dimension(self) -> float:
        """The growth exponent D: explicit in the interaction block, else the lattice's own."""
        return self.interaction.D if self.interaction.D is not None else self.lattice.natural_dimension


def check_constraints(config: RunConfig) -> RunConfig:
    """Cross-field rules that a single field validator cannot see."""
    lattice, interaction = config.lattice, config.interaction
    if lattice.kind == "chain" and lattice.size is None:
        raise ConfigValidationError("lattice.size", "a chain needs a size")
    if lattice.kind == "grid" and (lattice.dimension is None or lattice.side is None):
        raise ConfigValidationError("lattice.dimension", "a grid needs dimension and side")
    if lattice.kind == "custom" and lattice.distances is None:
        raise ConfigValidationError("lattice.distances", "a custom lattice needs a distance table")
    if config.dimension is None:
        raise ConfigValidationError("interaction.D", "D is required on a custom lattice")
    if interaction.type == "power_law_two_body" and interaction.alpha is None:
        raise ConfigValidationError("interaction.alpha", "the power-law interaction needs alpha")
    if interaction.type == "explicit" and not interaction.terms:
        raise ConfigValidationError("interaction.terms", "an explicit interaction needs terms")
    if config.sweep.R_policy == "fixed" and min(config.sweep.R_values) < 1:
        raise ConfigValidationError("sweep.R_values", "the fixed R policy needs R >= 1")
    if config.sweep.R_policy == "kappa_rule" or config.bound.profile == "power_law":
        if interaction.alpha is None or interaction.alpha <= config.dimension:
            raise ConfigValidationError(
                "interaction.alpha",
                f"alpha > D is required (alpha={interaction.alpha}, D={config.dimension})")
    for name, spec in (("observables.A", config.observables.A), ("observables.B", config.observables.B)):
        if spec.kind == "explicit" and (spec.support is None or spec.matrix is None):
            raise ConfigValidationError(name, "an explicit observable needs support and matrix")
    if config.observables.A.kind != "explicit" and config.observables.A.site is None:
        raise ConfigValidationError("observables.A.site", "A needs a site")
    return config


def parse_config(text: str) -> RunConfig:
    """
    Parses and validates a JSON run configuration.

    Raises:
        ConfigParseError: the text is not well-formed JSON.
        ConfigValidationError: a field violates a constraint or is unknown.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(e.msg, e.lineno, e.colno) from e
    if not isinstance(raw, dict):
        raise ConfigValidationError("<root>", "the configuration must be a JSON object")
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigValidationError(field, first["msg"]) from e
    return check_constraints(config)


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def emit_config(config: RunConfig) -> str:
    """Canonical JSON form: aliases, sorted keys, two-space indent."""
    return json.dumps(config.model_dump(mode="json", by_alias=True), sort_keys=True, indent=2)
