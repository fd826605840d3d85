"""
Atkinson-condition verification, square-summable solution counting and
limit point / limit circle criteria.

Everything that concerns an infinite interval is evaluated at an explicit
truncation; verdicts on infinite sums are heuristics and say so.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..base.config import resolve_tolerance
from ..base.exceptions import ConvergenceError, PreconditionError
from ..base.logger import get_logger
from ..utils.linalg_utils import LinalgUtils
from ..utils.series_utils import HEURISTIC_LABEL, GrowthVerdict, SeriesUtils
from .system import (
    BlockSpecialData,
    SturmLiouvilleData,
    SymplecticSystem,
    block_data_of,
    sturm_liouville_blocks,
)
from .solver import fundamental

logger = get_logger("symplectic.classify")

DEFAULT_SAMPLES = (0.0, 1.0, 1j, 1.0 + 1j, -2j)
DEFAULT_GROWTH_THRESHOLD = 1e-6
DEFAULT_TRUNCATION = 4096
# Fundamental matrix entries above this are cut off before forming Gram matrices.
GROWTH_CAP = 1e100

LIMIT_POINT = "limit point"
LIMIT_CIRCLE = "limit circle"
LIMIT_CIRCLE_FINITE = "limit circle (finite interval)"
UNDETERMINED = "undetermined at truncation"
CRITERION_SATISFIED = "criterion satisfied up to truncation"

HSequence = Union[Sequence[float], np.ndarray, Callable[[int], float]]


@dataclass
class AtkinsonResult:
    """Outcome of the Gram-matrix test on [a, b] over a set of sample values."""

    passed: bool
    min_quadratic_value: float
    interval: tuple
    per_sample: Dict[complex, float] = field(default_factory=dict)

    def __iter__(self):
        yield self.passed
        yield self.min_quadratic_value

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_quadratic_value": self.min_quadratic_value,
            "interval": list(self.interval),
            "samples": [
                {"lambda": lam, "min_eigenvalue": val}
                for lam, val in self.per_sample.items()
            ],
        }


def check_atkinson(
    sys: SymplecticSystem,
    a: int,
    b: int,
    samples: Iterable[complex] = DEFAULT_SAMPLES,
    tol: Optional[float] = None,
) -> AtkinsonResult:
    """
    Test whether every nontrivial solution has positive weighted sum on [a, b].

    For each sample lambda the Gram matrix sum_{k=a}^b Phi_k* Psi_k Phi_k with
    Phi_a = I is formed; the test passes when its smallest eigenvalue exceeds
    ``tol`` for every sample. The Gram matrix depends polynomially on lambda, so
    a handful of samples across both half-planes stands in for all lambda.

    Returns:
        Pass flag, worst smallest eigenvalue and the per-sample values
    """
    tol = resolve_tolerance(tol)
    if not (0 <= a <= b) or not sys.interval.contains(b):
        raise PreconditionError(
            f"[{a}, {b}] is not a subinterval of the coefficient indices"
        )
    psi = sys.psi_stack(a, b)
    per_sample = {}
    for lam in samples:
        phis = fundamental(sys, lam, start=a, stop=b).values
        gram = np.sum(LinalgUtils.dagger(phis) @ psi @ phis, axis=0)
        per_sample[complex(lam)] = LinalgUtils.min_eigenvalue(gram)
    worst = min(per_sample.values())
    passed = worst > tol
    logger.debug(f"Atkinson test on [{a}, {b}]: min eigenvalue {worst:.3e}")
    return AtkinsonResult(passed, float(worst), (a, b), per_sample)


def find_atkinson_interval(
    sys: SymplecticSystem,
    limit: int = 64,
    samples: Iterable[complex] = DEFAULT_SAMPLES,
    tol: Optional[float] = None,
) -> Optional[AtkinsonResult]:
    """Smallest [0, b] with b <= limit on which the Atkinson test passes."""
    samples = tuple(samples)
    last = min(limit, sys.horizon(None)) if sys.is_finite else limit
    for b in range(0, last + 1):
        result = check_atkinson(sys, 0, b, samples, tol)
        if result.passed:
            return result
    return None


@dataclass
class SquareSummableEstimate:
    """
    Estimated number of linearly independent solutions with finite weighted norm.

    ``profile`` holds the eigenvalues of the truncated Gram matrix at each
    checkpoint (rows) in ascending order (columns).
    """

    q_estimate: int
    stable: bool
    lam: complex
    truncation: Optional[int]
    checkpoints: List[int] = field(default_factory=list)
    profile: Optional[np.ndarray] = None
    raw_estimate: Optional[int] = None
    heuristic: bool = True

    def to_dict(self) -> dict:
        out = {
            "lambda": self.lam,
            "q_estimate": self.q_estimate,
            "stable": self.stable,
            "truncation": self.truncation,
        }
        if self.heuristic:
            out["method"] = HEURISTIC_LABEL
            out["checkpoints"] = self.checkpoints
            out["eigenvalue_profile"] = self.profile
            out["raw_estimate"] = self.raw_estimate
        else:
            out["method"] = "exact (finite interval)"
        return out


def count_square_summable(
    sys: SymplecticSystem,
    lam: complex,
    truncation: Optional[int] = None,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
    initial: Optional[np.ndarray] = None,
) -> SquareSummableEstimate:
    """
    Estimate q(lambda) from the growth of the truncated solution Gram matrix.

    The quadratic form beta -> sum_{k<=M} |Phi_k beta|^2_Psi is diagonalized
    at the checkpoints M/8, M/4, M/2 and M. An eigenvalue whose last three
    values pass the window-doubling test counts as a square-summable
    direction; the estimate is stable when the first three checkpoints give
    the same count. On a finite interval every solution is summable.
    Solutions growing past :data:`GROWTH_CAP` shorten the truncation, and
    the estimate is then never reported as stable.

    Args:
        sys: The system
        lam: Spectral parameter
        truncation: M, required on unbounded intervals
        growth_threshold: Relative increment regarded as negligible
        initial: Phi_0 (identity by default); a unitary change keeps the count

    Returns:
        The estimate with its eigenvalue profile
    """
    n2 = 2 * sys.n
    if sys.is_finite:
        return SquareSummableEstimate(
            n2, True, complex(lam), sys.horizon(None), heuristic=False
        )
    stop = sys.horizon(truncation)
    if stop < 8:
        raise PreconditionError(f"truncation {stop} is too small for the doubling test")
    with np.errstate(over="ignore", invalid="ignore"):
        phis = fundamental(sys, lam, truncation=stop, initial=initial).values[:-1]
        magnitude = np.max(np.abs(phis), axis=(1, 2))
    bounded = np.isfinite(magnitude) & (magnitude <= GROWTH_CAP)
    cut = False
    if not np.all(bounded):
        last = int(np.argmin(bounded)) - 1
        if last < 8:
            raise ConvergenceError(
                f"solutions at lambda={lam} exceed {GROWTH_CAP:.0e} before index 8"
            )
        logger.warning(
            f"Solutions at lambda={lam} grow past {GROWTH_CAP:.0e}; "
            f"truncation cut from {stop} to {last}"
        )
        stop = last
        phis = phis[: stop + 1]
        cut = True
    terms = LinalgUtils.dagger(phis) @ sys.psi_stack(0, stop) @ phis
    cumulative = np.cumsum(terms, axis=0)
    checkpoints = SeriesUtils.windows(stop, 4)
    profile = np.array(
        [
            np.linalg.eigvalsh(LinalgUtils.hermitian_part(cumulative[k]))
            for k in checkpoints
        ]
    )

    def count(rows: slice) -> int:
        verdicts = [
            SeriesUtils.judge(profile[rows, j], growth_threshold) for j in range(n2)
        ]
        return sum(1 for verdict in verdicts if verdict.convergent)

    raw = count(slice(1, 4))
    earlier = count(slice(0, 3))
    estimate = min(max(raw, sys.n), n2)
    if estimate != raw:
        logger.warning(
            f"Square-summable count {raw} outside [n, 2n] at lambda={lam}; clamped"
        )
    stable = earlier == raw and not cut
    if earlier != raw:
        logger.warning(
            f"Square-summable count at lambda={lam} changes under truncation doubling"
        )
    return SquareSummableEstimate(
        estimate, stable, complex(lam), stop, checkpoints, profile, raw
    )


@dataclass
class ConditionResult:
    """One hypothesis of a criterion: evaluated margin and verdict."""

    name: str
    passed: Optional[bool]
    margin: Optional[float] = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "margin": self.margin}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class CriterionReport:
    """Report of a limit point criterion evaluated up to a truncation."""

    name: str
    conditions: List[ConditionResult]
    truncation: int
    h_min: Optional[float] = None
    g: Optional[np.ndarray] = None
    divergence: Optional[GrowthVerdict] = None

    @property
    def satisfied(self) -> bool:
        return all(cond.passed for cond in self.conditions)

    @property
    def first_violation(self) -> Optional[str]:
        for cond in self.conditions:
            if not cond.passed:
                return cond.name
        return None

    @property
    def verdict(self) -> str:
        if self.satisfied:
            return CRITERION_SATISFIED
        return f"violated: {self.first_violation}"

    def __getitem__(self, name: str) -> ConditionResult:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = {
            "criterion": self.name,
            "verdict": self.verdict,
            "truncation": self.truncation,
            "conditions": [cond.to_dict() for cond in self.conditions],
            "h_min": self.h_min,
        }
        if self.divergence is not None:
            out["reciprocal_sum"] = self.divergence.to_dict()
        return out


def _h_values(h: HSequence, count: int) -> np.ndarray:
    if callable(h):
        return np.array([float(h(k)) for k in range(count)])
    values = np.asarray(h, dtype=float).ravel()
    if values.size == 1:
        return np.full(count, float(values[0]))
    if values.size < count:
        raise PreconditionError(f"h must provide {count} values, got {values.size}")
    return values[:count]


def _criterion_stop(interval, truncation: Optional[int]) -> int:
    if interval.is_finite:
        last = interval.n_upper - 1
        stop = last if truncation is None else min(truncation, last)
    else:
        stop = interval.resolve(
            truncation if truncation is not None else DEFAULT_TRUNCATION
        )
    if stop < 4:
        raise PreconditionError("the criterion needs at least a few indices")
    return stop


def limit_point_criterion(
    data: Union[BlockSpecialData, SymplecticSystem],
    h: HSequence,
    T: float,
    truncation: Optional[int] = None,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
    tol: Optional[float] = None,
    g_override: Optional[Callable[[int], float]] = None,
) -> CriterionReport:
    """
    Evaluate the sufficient condition for the limit point case of block systems.

    With g_k = max{1, ||W_{k+1}^{-1/2} (B_k* D_k)^{-1/2}||} the hypotheses are:
    B_k* C_k = 0, B_k* D_k > 0, W_k > 0, h_k >= h > 0,
    A_k* C_k + h_k W_{k+1} >= 0, divergence of sum 1/(g_k sqrt(h_k)) and
    (1/h_{k+1} - 1/h_k) g_k <= T/sqrt(h_k). Each is checked for k up to the
    truncation and reported with its worst margin.

    Args:
        data: Block data, or a system with weight diag(W, 0)
        h: The auxiliary sequence (array, constant or function of k)
        T: The constant of the increment bound
        truncation: Last index checked (4096 on unbounded intervals when None)
        growth_threshold: Threshold of the divergence heuristic
        tol: Tolerance of the matrix inequalities
        g_override: Replacement for g_k (used by the scalar corollary)

    Raises:
        PreconditionError: If a system without block special form is given
    """
    tol = resolve_tolerance(tol)
    if isinstance(data, SymplecticSystem):
        data = block_data_of(data, tol)
    stop = _criterion_stop(data.interval, truncation)
    hs = _h_values(h, stop + 2)
    ks = range(stop + 1)
    conditions: List[ConditionResult] = []

    bc = max(LinalgUtils.norm2(LinalgUtils.dagger(data.b[k]) @ data.c[k]) for k in ks)
    conditions.append(ConditionResult("b_star_c_vanishes", bc <= tol, bc))
    bd_pairs = [LinalgUtils.dagger(data.b[k]) @ data.d[k] for k in ks]
    bd_min = min(LinalgUtils.min_eigenvalue(m) for m in bd_pairs)
    bd_herm = max(LinalgUtils.hermitian_residual(m) for m in bd_pairs)
    conditions.append(
        ConditionResult(
            "b_star_d_positive", bool(bd_min > tol and bd_herm <= tol), bd_min
        )
    )
    weights = [data.w[k] for k in range(stop + 2)]
    w_min = min(LinalgUtils.min_eigenvalue(w) for w in weights)
    conditions.append(ConditionResult("weight_positive", bool(w_min > tol), w_min))
    h_min = float(np.min(hs))
    conditions.append(ConditionResult("h_bounded_below", bool(h_min > 0.0), h_min))

    structural_ok = all(cond.passed for cond in conditions)
    g = None
    divergence = None
    if structural_ok:
        dom = min(
            LinalgUtils.min_eigenvalue(
                LinalgUtils.dagger(data.a[k]) @ data.c[k] + hs[k] * weights[k + 1]
            )
            for k in ks
        )
        conditions.append(ConditionResult("weight_domination", bool(dom >= -tol), dom))
        if g_override is not None:
            g = np.array([g_override(k) for k in ks])
        else:
            g = np.array(
                [
                    max(
                        1.0,
                        LinalgUtils.norm2(
                            LinalgUtils.hermitian_power(weights[k + 1], -0.5)
                            @ LinalgUtils.hermitian_power(bd_pairs[k], -0.5)
                        ),
                    )
                    for k in ks
                ]
            )
        terms = 1.0 / (g * np.sqrt(hs[: stop + 1]))
        divergence = SeriesUtils.judge_terms(terms, growth_threshold)
        conditions.append(
            ConditionResult(
                "reciprocal_sum_divergence",
                divergence.divergent,
                divergence.partial_sums[-1],
                HEURISTIC_LABEL,
            )
        )
        head = hs[: stop + 1]
        increments = (1.0 / hs[1: stop + 2] - 1.0 / head) * g - T / np.sqrt(head)
        worst = float(np.max(increments))
        conditions.append(
            ConditionResult("reciprocal_increment_bound", bool(worst <= tol), worst)
        )
    else:
        skipped = "not evaluated: structural precondition fails"
        for name in (
            "weight_domination",
            "reciprocal_sum_divergence",
            "reciprocal_increment_bound",
        ):
            conditions.append(ConditionResult(name, None, None, skipped))
    report = CriterionReport(
        "limit_point_criterion", conditions, stop, h_min, g, divergence
    )
    logger.debug(f"Limit point criterion: {report.verdict}")
    return report


def _check_corollary_data(data: SturmLiouvilleData, stop: int) -> None:
    for k in range(stop + 2):
        if data.q_at(k) != 0.0:
            raise PreconditionError(f"q_{k} = {data.q_at(k)} is not zero")
        if data.p_at(k) >= 0.0:
            raise PreconditionError(f"p_{k} = {data.p_at(k)} is not negative")
        if data.w_at(k) <= 0.0:
            raise PreconditionError(f"w_{k} = {data.w_at(k)} is not positive")


def corollary_lpc(
    data: SturmLiouvilleData,
    h: HSequence,
    T: float,
    truncation: Optional[int] = None,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
    tol: Optional[float] = None,
) -> CriterionReport:
    """
    Scalar form of the limit point criterion for q = 0, p < 0, w > 0,
    with g_k = max{1, (-p_{k+1}/w_{k+1})^{1/2}}.
    """
    stop = _criterion_stop(data.interval, truncation)
    _check_corollary_data(data, stop)

    def g_scalar(k: int) -> float:
        return max(1.0, float(np.sqrt(-data.p_at(k + 1) / data.w_at(k + 1))))

    report = limit_point_criterion(
        sturm_liouville_blocks(data),
        h,
        T,
        stop,
        growth_threshold,
        tol,
        g_override=g_scalar,
    )
    report.name = "corollary_lpc"
    return report


@dataclass
class HintonLewisResult:
    """Partial sum of sqrt(w_k w_{k+1}) / |p_{k+1}| and its growth verdict."""

    partial_sum: float
    divergent: bool
    truncation: int
    growth: GrowthVerdict

    @property
    def verdict(self) -> str:
        return LIMIT_POINT if self.divergent else "inapplicable (series converges)"

    def to_dict(self) -> dict:
        return {
            "partial_sum": self.partial_sum,
            "divergent": self.divergent,
            "verdict": self.verdict,
            "truncation": self.truncation,
            "growth": self.growth.to_dict(),
        }


def hinton_lewis(
    data: SturmLiouvilleData,
    truncation: Optional[int] = None,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
) -> HintonLewisResult:
    """
    Divergence test of sum_k sqrt(w_k w_{k+1}) / |p_{k+1}|; divergence implies
    the limit point case for every nonreal lambda.
    """
    stop = _criterion_stop(data.interval, truncation)
    ks = np.arange(stop + 1)
    w = np.array([data.w_at(k) for k in range(stop + 2)])
    p = np.array([data.p_at(k) for k in range(stop + 2)])
    if np.any(w[: stop + 2] <= 0.0):
        raise PreconditionError("weights must be positive")
    terms = np.sqrt(w[ks] * w[ks + 1]) / np.abs(p[ks + 1])
    growth = SeriesUtils.judge_terms(terms, growth_threshold)
    return HintonLewisResult(float(np.sum(terms)), growth.divergent, stop, growth)


@dataclass
class ClassificationReport:
    """Estimates of q at +i and -i with the supporting criteria."""

    q_plus: SquareSummableEstimate
    q_minus: SquareSummableEstimate
    verdict: str
    truncation: Optional[int]
    criterion_results: Dict[str, object] = field(default_factory=dict)
    atkinson: Optional[AtkinsonResult] = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "truncation": self.truncation,
            "q_plus": self.q_plus.to_dict(),
            "q_minus": self.q_minus.to_dict(),
            "atkinson": None if self.atkinson is None else self.atkinson.to_dict(),
            "criteria": {
                name: result.to_dict()
                for name, result in self.criterion_results.items()
            },
        }


def classify_system(
    sys: SymplecticSystem,
    truncation: Optional[int] = None,
    h: Optional[HSequence] = None,
    T: float = 0.0,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
    samples: Iterable[complex] = DEFAULT_SAMPLES,
    tol: Optional[float] = None,
) -> ClassificationReport:
    """
    Classify a system as limit point or limit circle.

    Finite intervals are always in the limit circle case. Otherwise the
    counts at +i and -i decide, supported by the Hinton-Lewis test (scalar
    systems) and the block criterion when ``h`` is given; a satisfied
    criterion settles the limit point case on its own. ``tol`` applies to the
    Atkinson test and to the criterion's matrix inequalities.
    """
    samples = tuple(samples)
    tol = resolve_tolerance(tol)
    atkinson = find_atkinson_interval(sys, samples=samples, tol=tol)
    if atkinson is None:
        logger.warning(
            "No Atkinson interval [0, b] found; counts may not equal deficiency indices"
        )
    if sys.is_finite:
        q_plus = count_square_summable(sys, 1j)
        q_minus = count_square_summable(sys, -1j)
        return ClassificationReport(
            q_plus, q_minus, LIMIT_CIRCLE_FINITE, sys.horizon(None), {}, atkinson
        )

    stop = sys.horizon(truncation if truncation is not None else DEFAULT_TRUNCATION)
    q_plus = count_square_summable(sys, 1j, stop, growth_threshold)
    q_minus = count_square_summable(sys, -1j, stop, growth_threshold)
    criteria: Dict[str, object] = {}
    settled_lp = False
    if isinstance(sys.origin, SturmLiouvilleData):
        hl = hinton_lewis(sys.origin, stop, growth_threshold)
        criteria["hinton_lewis"] = hl
        settled_lp = settled_lp or hl.divergent
    if h is not None:
        lpc = limit_point_criterion(sys, h, T, stop, growth_threshold, tol)
        criteria["limit_point_criterion"] = lpc
        settled_lp = settled_lp or lpc.satisfied

    stable = q_plus.stable and q_minus.stable
    if settled_lp or (stable and q_plus.q_estimate == q_minus.q_estimate == sys.n):
        verdict = LIMIT_POINT
    elif stable and q_plus.q_estimate == q_minus.q_estimate == 2 * sys.n:
        verdict = LIMIT_CIRCLE
    else:
        verdict = UNDETERMINED
    logger.info(f"Classification at truncation {stop}: {verdict}")
    return ClassificationReport(q_plus, q_minus, verdict, stop, criteria, atkinson)
