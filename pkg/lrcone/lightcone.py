"""
The power-law light cone: exponents, the analytic front r_max(t), group
velocity, large-t asymptotics of the three bound terms, and empirical fronts
extracted from simulated commutator norms.
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple

import numpy as np

from lrcone.errors import InvalidArgumentError
from lrcone.geometry import GrowthCertificate
from lrcone.bounds import paper_constant_C2

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG = {
    "DEFAULT_LAMBDA": 4.0,
    # Empirical front threshold, as a fraction of the generic bound 2||A|| ||B||.
    "EPSILON_FRACTION": 1e-3,
}
# --- End Configuration ---

VelocityForm = Literal["derivative", "paper_display"]


class Exponents(NamedTuple):
    kappa: float
    eta: float
    gamma: float
    kappa_below_one: bool


def exponents(D: float, alpha: float) -> Exponents:
    """kappa = (D+1)/(alpha+1), eta = (alpha-D)/(alpha+1), gamma = (D+1)/(alpha-D)."""
    if D <= 0:
        raise InvalidArgumentError(f"D must be positive, got {D}")
    if alpha <= D:
        raise InvalidArgumentError(f"The power-law cone needs alpha > D, got alpha={alpha}, D={D}")
    kappa = (D + 1.0) / (alpha + 1.0)
    eta = (alpha - D) / (alpha + 1.0)
    gamma = (D + 1.0) / (alpha - D)
    return Exponents(kappa=kappa, eta=eta, gamma=gamma, kappa_below_one=kappa < 1.0)


def r_max(t: float, lam: float, v: float, eta: float) -> float:
    """(lambda v t)^(1/eta)."""
    _check_cone_args(t, lam, v)
    return (lam * v * t) ** (1.0 / eta)


def v_g(t: float, lam: float, v: float, eta: float, gamma: float, form: VelocityForm = "derivative") -> float:
    """
    d r_max/dt = (1+gamma)(lambda v)^(1/eta) t^gamma.

    `paper_display` drops the (1+gamma) factor.
    """
    _check_cone_args(t, lam, v)
    base = (lam * v) ** (1.0 / eta) * t ** gamma
    if form == "derivative":
        return (1.0 + gamma) * base
    if form == "paper_display":
        return base
    raise InvalidArgumentError(f"Unknown velocity form '{form}'")


def _check_cone_args(t: float, lam: float, v: float):
    if t <= 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    if lam <= 1:
        raise InvalidArgumentError(f"lambda must exceed 1, got {lam}")
    if v <= 0:
        raise InvalidArgumentError(f"v must be positive, got {v}")


def default_epsilon(normA: float, normB: float) -> float:
    return CONFIG["EPSILON_FRACTION"] * 2.0 * normA * normB


@dataclass(frozen=True)
class ConeParameters:
    D: float
    alpha: float
    kappa: float
    eta: float
    gamma: float
    lam: float
    v: float

    def __post_init__(self):
        if self.lam <= 1:
            raise InvalidArgumentError(f"lambda must exceed 1, got {self.lam}")
        if self.v <= 0:
            raise InvalidArgumentError(f"v must be positive, got {self.v}")

    @classmethod
    def from_model(cls, D: float, alpha: float, lam: float = CONFIG["DEFAULT_LAMBDA"], v: float = 1.0) -> 'ConeParameters':
        kappa, eta, gamma, _ = exponents(D, alpha)
        return cls(D=D, alpha=alpha, kappa=kappa, eta=eta, gamma=gamma, lam=lam, v=v)

    def r_max(self, t: float) -> float:
        return r_max(t, self.lam, self.v, self.eta)

    def v_g(self, t: float, form: VelocityForm = "derivative") -> float:
        return v_g(t, self.lam, self.v, self.eta, self.gamma, form)

    def cutoff(self, r: float) -> float:
        """R = r^kappa."""
        return r ** self.kappa


@dataclass(frozen=True)
class CurvePoint:
    t: float
    r_max: float
    v_g: float
    v_g_paper: float


def front_curve(params: ConeParameters, t_grid: Iterable[float]) -> list[CurvePoint]:
    return [CurvePoint(t=t, r_max=params.r_max(t), v_g=params.v_g(t), v_g_paper=params.v_g(t, "paper_display"))
            for t in t_grid if t > 0]


# --- Large-t asymptotics ---

@dataclass(frozen=True)
class AsymptoticRow:
    """Bound terms (as natural logs) after substituting r = r_max(t) and R = r^kappa."""
    t: float
    r: float
    R: float
    log_term1: float
    log_term2: float
    log_term3: float
    term2_limit: float


def asymptotic_check(params: ConeParameters, t_grid: Iterable[float], growth: GrowthCertificate,
                     tail: GrowthCertificate, C_prime: float,
                     normA: float = 1.0, normB: float = 1.0, sizeX: int = 1) -> list[AsymptoticRow]:
    """
    Evaluates the three-term bound along the analytic front with f(R) = C'(1+R)^-alpha.

    `tail` is the certificate used in the third term; callers pass the unit
    shell certificate (exponent D-1) for lattices, which yields the
    t / r^(2 eta) prefactor. Terms are kept in log space since they underflow
    long before t = 100.
    """
    if C_prime <= 0:
        raise InvalidArgumentError(f"C' must be positive, got {C_prime}")
    C2 = paper_constant_C2(tail)
    AB = normA * normB
    limit = 4.0 * growth.C * C_prime * AB * sizeX / (params.lam * params.v)
    rows = []
    for t in t_grid:
        if t <= 0:
            continue
        r = params.r_max(t)
        R = params.cutoff(r)
        exponent = params.v * t - r / R
        log_f = math.log(C_prime) - params.alpha * math.log1p(R)
        log_term1 = math.log(2.0 * AB * sizeX) + exponent
        log_term2 = math.log(4.0 * AB * sizeX * t * growth.C) + growth.D * math.log1p(r) + log_f
        log_term3 = (math.log(2.0 * C2 * AB * sizeX ** 2 * t * R) + tail.D * math.log(max(r, R))
                     + log_f + exponent)
        rows.append(AsymptoticRow(t=t, r=r, R=R, log_term1=log_term1, log_term2=log_term2,
                                  log_term3=log_term3, term2_limit=limit))
    return rows


def decay_rates(rows: list[AsymptoticRow]) -> list[tuple[float, float, float]]:
    """Forward-difference slopes (t, d log term1/dt, d log term3/dt) between consecutive rows."""
    return [(a.t, (b.log_term1 - a.log_term1) / (b.t - a.t), (b.log_term3 - a.log_term3) / (b.t - a.t))
            for a, b in zip(rows, rows[1:])]


def expected_decay_rate(params: ConeParameters) -> float:
    """-(lambda - 1) v."""
    return -(params.lam - 1.0) * params.v


# --- Empirical fronts ---

@dataclass(frozen=True)
class FrontRecord:
    t: float
    r_star: float
    epsilon: float
    saturated: bool = False


class PowerLawFit(NamedTuple):
    exponent: float
    prefactor: float
    residual: float
    points_used: int


def empirical_front(records: Iterable[tuple[float, float, float]], epsilon: float) -> list[FrontRecord]:
    """
    r_star(t) = smallest grid r with norm(t, r') < epsilon for every grid r' >= r.

    Records are (t, r, norm) triples on a rectangular grid; repeated (t, r)
    points keep the largest norm. When even the outermost r misses epsilon,
    r_star is infinite. Fronts sitting on the outermost r are flagged as
    saturated.
    """
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    table: dict[float, dict[float, float]] = defaultdict(dict)
    for t, r, norm in records:
        row = table[float(t)]
        row[float(r)] = max(row.get(float(r), 0.0), float(norm))
    if not table:
        raise InvalidArgumentError("empirical_front needs a nonempty record grid")
    r_grid = sorted(next(iter(table.values())))
    if any(sorted(row) != r_grid for row in table.values()):
        raise InvalidArgumentError("Records do not cover a rectangular (t, r) grid")

    front = []
    for t in sorted(table):
        row = table[t]
        r_star = math.inf
        for r in reversed(r_grid):
            if row[r] >= epsilon:
                break
            r_star = r
        saturated = math.isinf(r_star) or (r_star == r_grid[-1] and len(r_grid) > 1)
        front.append(FrontRecord(t=t, r_star=r_star, epsilon=epsilon, saturated=saturated))
    return front


def fit_power_law(front: Iterable[FrontRecord]) -> PowerLawFit:
    """Least squares fit of log r_star against log t over the unsaturated rows."""
    usable = [rec for rec in front
              if not rec.saturated and math.isfinite(rec.r_star) and rec.r_star > 0 and rec.t > 0]
    if len(usable) < 2:
        raise InvalidArgumentError(f"A power-law fit needs at least two usable front points, got {len(usable)}")
    log_t = np.log([rec.t for rec in usable])
    log_r = np.log([rec.r_star for rec in usable])
    slope, intercept = np.polyfit(log_t, log_r, 1)
    residual = float(np.sqrt(np.mean((log_r - (slope * log_t + intercept)) ** 2)))
    return PowerLawFit(exponent=float(slope), prefactor=float(math.exp(intercept)),
                       residual=residual, points_used=len(usable))
