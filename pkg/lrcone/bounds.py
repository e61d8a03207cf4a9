"""
Right-hand sides of the light-cone inequalities, with explicit constants.

Two constant modes exist for the long-range (third) term:

* ``paper_form`` uses the closed expression 2 C2 ||A|| ||B|| |X|^2 t R (r v R)^D f(R) e^(vt - r/R)
  with the explicit C2 = 2 C3, C3 = e C D! 4^D derived from the growth certificate.
* ``numeric_tight`` stops before any constant slack and evaluates the shell
  sum S exactly on the finite space, which is never larger.

The constant chain behind C3, for S = sup_x sum_k ball(x, r+k+1) e^(-(r+k)/R):

    S <= C e^(1/R) int_0^inf (2+r+y)^D e^(-(r+y)/R) dy
      <= C e^(1/R+2) R^(D+1) Gamma(D+1, r/R + 2)             (R >= 1)
      <= C e^(1/R) D! R^(D+1) (3 + r/R)^D e^(-r/R)
      <= e C D! 4^D (r v R)^D R e^(-r/R)

With the lattice refinement, unit shells replace balls and the shell
certificate (exponent D-1) replaces C(1+r)^D throughout.
"""
import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Literal, Sequence

import numpy as np
import scipy.special

from lrcone.errors import InvalidArgumentError, ResourceLimitError
from lrcone.geometry import (MetricSpace, GrowthCertificate, ball_count, shell_count, eccentricity,
                             neighborhood, is_integer_exponent, CONFIG as GEOMETRY_CONFIG)
from lrcone.model import Interaction
from lrcone.quadrature import integrate_adaptive_simpson, CONFIG as QUADRATURE_CONFIG
from lrcone.quantum import (SpectralHamiltonian, HeisenbergPropagator, HilbertSpace, commutator_norm,
                            embed_matrix, spectral_norm)

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG = {
    "MAX_CHAINS": 1_000_000,
}
# --- End Configuration ---

ShellSumMode = Literal["numeric", "gamma", "closed_form"]


class ConstantMode(str, Enum):
    PAPER_FORM = "paper_form"
    NUMERIC_TIGHT = "numeric_tight"


@dataclass(frozen=True)
class BoundInputs:
    """Scalar inputs of the three-term bound for one (A, B, t, r, R) point."""
    normA: float
    normB: float
    sizeX: int
    t: float
    r: float
    R: float
    v: float
    f_of_R: float
    growth: GrowthCertificate
    refined_exponent: bool = False
    # Exact S from shell_sum_S; required by numeric_tight.
    shell_sum: float | None = None
    # Shell certificate (exponent D-1); required by paper_form when refined_exponent is set.
    shell_growth: GrowthCertificate | None = None
    C2_override: float | None = None
    tight_time_factor: bool = False

    def __post_init__(self):
        if self.R < 1:
            raise InvalidArgumentError(f"The three-term bound needs R >= 1, got R={self.R}")
        if self.normA < 0 or self.normB < 0:
            raise InvalidArgumentError("Observable norms must be nonnegative")
        if self.sizeX < 1:
            raise InvalidArgumentError(f"|X| must be positive, got {self.sizeX}")
        if self.t < 0 or self.r < 0:
            raise InvalidArgumentError(f"t and r must be nonnegative, got t={self.t}, r={self.r}")
        if self.v < 0 or self.f_of_R < 0:
            raise InvalidArgumentError("v and f(R) must be nonnegative")
        if self.C2_override is not None and self.C2_override < 0:
            raise InvalidArgumentError("C2_override must be nonnegative")

    @property
    def r_or_R(self) -> float:
        return max(self.r, self.R)

    @property
    def tail_certificate(self) -> GrowthCertificate:
        """The certificate that bounds the shell sum: balls by default, unit shells when refined."""
        if not self.refined_exponent:
            return self.growth
        if self.shell_growth is None:
            raise InvalidArgumentError("refined_exponent needs a shell certificate")
        return self.shell_growth

    def time_factor(self) -> float:
        """t e^(vt), or the exact integral (e^(vt) - 1)/v under tight_time_factor."""
        if self.tight_time_factor:
            return self.t if self.v == 0 else math.expm1(self.v * self.t) / self.v
        return self.t * math.exp(self.v * self.t)


@dataclass(frozen=True)
class BoundBreakdown:
    term1: float
    term2: float
    term3: float
    total: float
    constant_mode: ConstantMode
    C2_used: float | None = None


@dataclass(frozen=True)
class Lemma31Evaluation:
    """The right-hand side of the Duhamel inequality, split into its three parts."""
    truncated: float
    near: float
    far: float
    quadrature_error: float

    @property
    def rhs(self) -> float:
        return self.truncated + self.near + self.far

    def upper(self, slack: float = 0.0) -> float:
        """rhs plus the quadrature error, never less than rhs + slack."""
        return self.rhs + max(self.quadrature_error, slack)


# --- Velocity and finite-range bound ---

def velocity(C0: float) -> float:
    """v = 2e C0."""
    if C0 < 0:
        raise InvalidArgumentError(f"C0 must be nonnegative, got {C0}")
    return 2.0 * math.e * C0


def finite_range_bound(normA: float, normB: float, sizeX: int, dXY: float, R: float, v: float, t: float) -> float:
    """2 ||A|| ||B|| |X| exp(vt - d(X,Y)/R)."""
    if R <= 0:
        raise InvalidArgumentError(f"R must be positive, got {R}")
    if t < 0:
        raise InvalidArgumentError(f"t must be nonnegative, got {t}")
    return 2.0 * normA * normB * sizeX * math.exp(v * t - dXY / R)


# --- Iterated series ---

def series_a_n(short: Interaction, X: Iterable[int], Y: Iterable[int], R: float, n: int,
               max_chains: int = CONFIG["MAX_CHAINS"]) -> float:
    """
    Brute-force a_n: the sum over chains Z_1..Z_n of terms with diam < R, Z_1
    meeting X, consecutive supports overlapping and Z_n meeting Y, of the
    product of term norms.

    Raises:
        ResourceLimitError: more than `max_chains` partial chains would be visited.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    X, Y = frozenset(X), frozenset(Y)
    if not X or not Y:
        raise InvalidArgumentError("X and Y must be nonempty")
    kept = [(frozenset(term.support), term.norm)
            for term, diam in zip(short.terms, short.diameters) if diam < R]
    overlaps = [[j for j, (other, _) in enumerate(kept) if support & other] for support, _ in kept]
    meets_Y = [bool(support & Y) for support, _ in kept]

    visited = 0
    total = 0.0

    def _extend(k: int, depth: int, product: float):
        nonlocal visited, total
        visited += 1
        if visited > max_chains:
            raise ResourceLimitError(f"a_{n} enumeration exceeded {max_chains} chains")
        if depth == n:
            if meets_Y[k]:
                total += product
            return
        for j in overlaps[k]:
            _extend(j, depth + 1, product * kept[j][1])

    for k, (support, norm) in enumerate(kept):
        if support & X:
            _extend(k, 1, norm)
    return total


def series_a_n_bound(C0: float, sizeX: int, n: int, R: float, dXY: float) -> float:
    """The a_n majorant: 0 when nR < d(X,Y), C0^n |X| otherwise."""
    if n * R < dXY:
        return 0.0
    return C0 ** n * sizeX


# --- Shell sums and constants ---

def upper_incomplete_gamma(D: int, a: float) -> float:
    """Gamma(D+1, a) = int_a^inf y^D e^-y dy = D! e^-a sum_{k<=D} a^k/k!."""
    if not is_integer_exponent(D):
        raise InvalidArgumentError(f"D must be a nonnegative integer, got {D}")
    if a < 0:
        raise InvalidArgumentError(f"a must be nonnegative, got {a}")
    D = int(D)
    partial = sum(a ** k / math.factorial(k) for k in range(D + 1))
    return math.factorial(D) * math.exp(-a) * partial


def _gamma_upper(s_minus_one: float, a: float) -> float:
    if is_integer_exponent(s_minus_one):
        return upper_incomplete_gamma(int(s_minus_one), a)
    s = s_minus_one + 1.0
    return float(scipy.special.gammaincc(s, a) * scipy.special.gamma(s))


def shell_constant_C3(certificate: GrowthCertificate) -> float:
    """C3 = e C D! 4^D, for an integer certificate exponent."""
    if not is_integer_exponent(certificate.D):
        raise InvalidArgumentError(f"Closed-form constants need an integer exponent, got D={certificate.D}")
    D = int(certificate.D)
    return math.e * certificate.C * math.factorial(D) * 4.0 ** D


def paper_constant_C2(certificate: GrowthCertificate) -> float:
    return 2.0 * shell_constant_C3(certificate)


def _count_tail(space: MetricSpace, x: int, r: float, R: float, refined: bool) -> float:
    decay = math.exp(-1.0 / R)
    ecc = eccentricity(space, x)
    tol = GEOMETRY_CONFIG["DIST_TOL"]
    if refined:
        # unit shells (r+k, r+k+1] are empty once r+k >= eccentricity
        K = max(0, math.ceil(ecc - r - tol))
        return sum(shell_count(space, x, r + k + 1) * math.exp(-(r + k) / R) for k in range(K))
    # balls saturate at n sites once r+k+1 >= eccentricity; the rest is geometric
    K = max(0, math.ceil(ecc - r - 1 - tol))
    partial = sum(ball_count(space, x, r + k + 1) * math.exp(-(r + k) / R) for k in range(K))
    tail = space.n_sites * math.exp(-(r + K) / R) / (1.0 - decay)
    return partial + tail


def shell_sum_S(space: MetricSpace, growth: GrowthCertificate, r: float, R: float,
                sites: Iterable[int] | None = None, mode: ShellSumMode = "numeric",
                refined: bool = False) -> float:
    """
    S = sup_x sum_{k>=0} N_x(r+k+1) e^(-(r+k)/R), with N_x the closed ball count
    (or the unit shell count when `refined`).

    `growth` is the certificate bounding N_x (the shell certificate when
    refined); it is only consulted by the `gamma` and `closed_form` modes.
    The supremum runs over `sites` (all sites by default).
    """
    if R < 1:
        raise InvalidArgumentError(f"R must be at least 1, got {R}")
    if r < 0:
        raise InvalidArgumentError(f"r must be nonnegative, got {r}")
    if mode == "numeric":
        candidates = space.sites if sites is None else sorted(set(sites))
        return max(_count_tail(space, x, r, R, refined) for x in candidates)
    E = growth.D
    if mode == "gamma":
        return growth.C * math.exp(1.0 / R + 2.0) * R ** (E + 1) * _gamma_upper(E, r / R + 2.0)
    if mode == "closed_form":
        return shell_constant_C3(growth) * max(r, R) ** E * R * math.exp(-r / R)
    raise InvalidArgumentError(f"Unknown shell-sum mode '{mode}'")


# --- Long-range term ---

def embedded_terms(interaction: Interaction, hilbert: HilbertSpace) -> list[np.ndarray]:
    return [embed_matrix(term.matrix, term.support, hilbert) for term in interaction.terms]


def _split_by_neighborhood(long: Interaction, X: Iterable[int], r: float) -> tuple[list[int], list[int]]:
    """Indices of long terms meeting the r-neighborhood of X, and of those missing it."""
    X_r = neighborhood(long.space, X, r)
    near, far = [], []
    for k, term in enumerate(long.terms):
        (near if X_r.intersection(term.support) else far).append(k)
    return near, far


def lemma_B1_lhs(H_short: SpectralHamiltonian, long: Interaction, A: np.ndarray, X: Iterable[int],
                 r: float, t: float, hilbert: HilbertSpace | None = None) -> float:
    """sum over long Z missing the r-neighborhood of X of ||[tau_t^(<R)(A), h_Z]||, by exact evolution."""
    hilbert = hilbert or HilbertSpace.for_interaction(long, cap=H_short.dim)
    _, far = _split_by_neighborhood(long, X, r)
    if not far:
        return 0.0
    evolved = HeisenbergPropagator(H_short, A).at(t)
    terms = long.terms
    return float(sum(commutator_norm(evolved, embed_matrix(terms[k].matrix, terms[k].support, hilbert))
                     for k in far))


def lemma_B1_bound(inputs: BoundInputs, mode: ConstantMode = ConstantMode.NUMERIC_TIGHT) -> float:
    """
    Bound on the far long-range sum at time t.

    paper_form:    C2 ||A|| |X|^2 (r v R)^E R f(R) e^(vt - r/R)
    numeric_tight: 2 ||A|| |X|^2 f(R) e^(vt) S
    """
    mode = _effective_mode(inputs, ConstantMode(mode))
    if inputs.f_of_R == 0.0:
        return 0.0
    common = inputs.normA * inputs.sizeX ** 2 * inputs.f_of_R
    if mode is ConstantMode.NUMERIC_TIGHT:
        return 2.0 * common * math.exp(inputs.v * inputs.t) * _require_shell_sum(inputs)
    cert = inputs.tail_certificate
    return (_C2(inputs) * common * inputs.r_or_R ** cert.D * inputs.R
            * math.exp(inputs.v * inputs.t - inputs.r / inputs.R))


def lemma31_rhs(H_short: SpectralHamiltonian, long: Interaction, A: np.ndarray, B: np.ndarray,
                X: Iterable[int], r: float, t: float,
                quadrature_tol: float = QUADRATURE_CONFIG["DEFAULT_TOL"],
                hilbert: HilbertSpace | None = None) -> Lemma31Evaluation:
    """
    ||[tau_t^(<R)(A), B]|| + 2||B|| sum_Z int_0^t ||[tau_{t-s}^(<R)(A), h_Z^(>=R)]|| ds,
    with the sum split by whether Z meets the r-neighborhood of X.

    The integrals share one adaptive Simpson subdivision in u = t - s.
    """
    if r <= 0:
        raise InvalidArgumentError(f"r must be positive, got {r}")
    if t < 0:
        raise InvalidArgumentError(f"t must be nonnegative, got {t}")
    hilbert = hilbert or HilbertSpace.for_interaction(long, cap=H_short.dim)
    propagator = HeisenbergPropagator(H_short, A)
    truncated = commutator_norm(propagator.at(t), B)
    if not long.terms or t == 0:
        return Lemma31Evaluation(truncated=truncated, near=0.0, far=0.0, quadrature_error=0.0)

    h_long = embedded_terms(long, hilbert)

    def integrand(u: float) -> np.ndarray:
        evolved = propagator.at(u)
        return np.array([commutator_norm(evolved, h) for h in h_long])

    integrals, error = integrate_adaptive_simpson(integrand, 0.0, t, tol=quadrature_tol)
    near, far = _split_by_neighborhood(long, X, r)
    weight = 2.0 * spectral_norm(B)
    return Lemma31Evaluation(
        truncated=truncated,
        near=weight * float(np.sum(integrals[near])),
        far=weight * float(np.sum(integrals[far])),
        quadrature_error=weight * error,
    )


# --- Three-term bound ---

@functools.lru_cache(maxsize=None)
def _warn_non_integer(D: float):
    logger.warning("Exponent D=%s is not an integer; paper_form falls back to numeric_tight.", D)


def _effective_mode(inputs: BoundInputs, mode: ConstantMode) -> ConstantMode:
    if mode is ConstantMode.PAPER_FORM and not is_integer_exponent(inputs.tail_certificate.D):
        _warn_non_integer(inputs.tail_certificate.D)
        return ConstantMode.NUMERIC_TIGHT
    return mode


def _require_shell_sum(inputs: BoundInputs) -> float:
    if inputs.shell_sum is None:
        raise InvalidArgumentError("numeric_tight mode needs the exact shell sum S")
    return inputs.shell_sum


def _C2(inputs: BoundInputs) -> float:
    if inputs.C2_override is not None:
        return inputs.C2_override
    return paper_constant_C2(inputs.tail_certificate)


def theorem_bound(inputs: BoundInputs, mode: ConstantMode = ConstantMode.NUMERIC_TIGHT) -> BoundBreakdown:
    """
    term1 = 2 ||A|| ||B|| |X| e^(vt - r/R)
    term2 = 4 ||A|| ||B|| |X| t g(r) f(R)
    term3 = 2 ||B|| x (time-integrated far long-range bound)
    """
    mode = _effective_mode(inputs, ConstantMode(mode))
    AB = inputs.normA * inputs.normB
    term1 = 2.0 * AB * inputs.sizeX * math.exp(inputs.v * inputs.t - inputs.r / inputs.R)
    term2 = 4.0 * AB * inputs.sizeX * inputs.t * inputs.growth.g(inputs.r) * inputs.f_of_R

    common = inputs.normA * inputs.sizeX ** 2 * inputs.f_of_R * inputs.time_factor()
    C2_used = None
    if mode is ConstantMode.NUMERIC_TIGHT:
        term3 = 2.0 * inputs.normB * 2.0 * common * _require_shell_sum(inputs)
    else:
        C2_used = _C2(inputs)
        exponent = inputs.tail_certificate.D
        term3 = (2.0 * inputs.normB * C2_used * common * inputs.r_or_R ** exponent * inputs.R
                 * math.exp(-inputs.r / inputs.R))
    return BoundBreakdown(term1=term1, term2=term2, term3=term3, total=term1 + term2 + term3,
                          constant_mode=mode, C2_used=C2_used)


def theorem_bounds(inputs: BoundInputs, modes: Sequence[ConstantMode]) -> list[BoundBreakdown]:
    return [theorem_bound(inputs, mode) for mode in modes]
