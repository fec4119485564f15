"""
Paired two-tailed significance tests over per-request score differences.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from data.models.significance import ResamplingConfig, TestMethod, TestName, TestResult
from app.core.rng import stream

# Upper bound on array elements materialized per resampling chunk
_CHUNK_ELEMENTS = 2_000_000
# Relative slack when comparing resampled statistics against the observed one
_RELATIVE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DifferenceVector:
    """Paired differences d_i = E_i - B_i, with no request identity."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size < 2:
            raise ValueError("paired tests need at least 2 differences")
        if not np.all(np.isfinite(values)):
            raise ValueError("differences must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_scores(cls, b: Sequence[float], e: Sequence[float]) -> "DifferenceVector":
        b = np.asarray(b, dtype=float)
        e = np.asarray(e, dtype=float)
        if b.shape != e.shape:
            raise ValueError(f"score vectors differ in length: {b.size} vs {e.size}")
        return cls(e - b)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


Differences = Union[DifferenceVector, Sequence[float], np.ndarray]


def _as_differences(d: Differences) -> DifferenceVector:
    return d if isinstance(d, DifferenceVector) else DifferenceVector(np.asarray(d, dtype=float))


def _chunks(total: int, width: int) -> Iterable[Tuple[int, int, int]]:
    """Yield (chunk_index, start, size) covering ``total`` draws of ``width`` elements each."""
    size = max(1, min(total, _CHUNK_ELEMENTS // max(1, width)))
    for index, start in enumerate(range(0, total, size)):
        yield index, start, min(size, total - start)


def _tolerance(values: np.ndarray) -> float:
    return _RELATIVE_TOLERANCE * float(np.sum(np.abs(values)))


def _two_tailed(lower: float, upper: float) -> float:
    return float(min(1.0, 2.0 * min(lower, upper)))


def t_test_paired(d: Differences) -> TestResult:
    """
    Student's paired t-test of a zero mean difference.

    Args:
        d: Paired differences

    Returns:
        TestResult: t = mean / (s / sqrt(n)), p from Student-t with n-1 df
    """
    d = _as_differences(d)
    x, n = d.values, d.n
    mean = float(x.mean())
    if np.ptp(x) == 0.0:
        if mean == 0.0:
            return TestResult(test_name=TestName.T, statistic=0.0, p_value=1.0,
                              method=TestMethod.DEGENERATE, effective_n=n)
        return TestResult(test_name=TestName.T, statistic=float(np.copysign(np.inf, mean)), p_value=0.0,
                          method=TestMethod.DEGENERATE, effective_n=n)
    s = float(x.std(ddof=1))
    t = mean / (s / np.sqrt(n))
    p = 2.0 * float(stats.t.sf(abs(t), df=n - 1))
    return TestResult(test_name=TestName.T, statistic=float(t), p_value=min(1.0, p),
                      method=TestMethod.EXACT, effective_n=n)


def bootstrap_shift_test(d: Differences, cfg: ResamplingConfig) -> TestResult:
    """
    Bootstrap shift test: resample the centered differences and compare
    resampled means with the observed mean.

    p = (count + 1) / (B + 1), where count is the number of resamples with
    |mean| >= |observed mean|.
    """
    d = _as_differences(d)
    x, n = d.values, d.n
    centered = x - x.mean()
    observed = abs(float(x.sum()))
    tol = _tolerance(x)
    count = 0
    for index, _, size in _chunks(cfg.bootstrap_B, n):
        rng = stream(cfg.seed, TestName.BOOTSTRAP.value, index)
        picks = rng.integers(0, n, size=(size, n))
        sums = centered[picks].sum(axis=1)
        count += int(np.count_nonzero(np.abs(sums) >= observed - tol))
    p = (count + 1) / (cfg.bootstrap_B + 1)
    return TestResult(test_name=TestName.BOOTSTRAP, statistic=abs(d.mean), p_value=min(1.0, p),
                      method=TestMethod.MONTE_CARLO, resamples_used=cfg.bootstrap_B,
                      effective_n=n, seed=cfg.seed)


def _exact_sign_flip_count(x: np.ndarray, observed: float, tol: float) -> int:
    n = x.size
    total = 1 << n
    bits = np.arange(n, dtype=np.int64)
    count = 0
    for _, start, size in _chunks(total, n):
        codes = np.arange(start, start + size, dtype=np.int64)
        signs = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        sums = signs @ x
        count += int(np.count_nonzero(np.abs(sums) >= observed - tol))
    return count


def randomization_test(d: Differences, cfg: ResamplingConfig) -> TestResult:
    """
    Paired randomization (sign-flip) test of the mean difference.

    Enumerates all 2^n sign assignments when n <= exact_threshold, otherwise
    draws R random sign vectors with add-one smoothing.
    """
    d = _as_differences(d)
    x, n = d.values, d.n
    observed = abs(float(x.sum()))
    tol = _tolerance(x)
    if n <= cfg.exact_threshold:
        total = 1 << n
        count = _exact_sign_flip_count(x, observed, tol)
        return TestResult(test_name=TestName.RANDOMIZATION, statistic=abs(d.mean), p_value=count / total,
                          method=TestMethod.EXACT, resamples_used=total, effective_n=n, seed=cfg.seed)
    count = 0
    for index, _, size in _chunks(cfg.randomization_R, n):
        rng = stream(cfg.seed, TestName.RANDOMIZATION.value, index)
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(size, n))
        sums = signs @ x
        count += int(np.count_nonzero(np.abs(sums) >= observed - tol))
    p = (count + 1) / (cfg.randomization_R + 1)
    return TestResult(test_name=TestName.RANDOMIZATION, statistic=abs(d.mean), p_value=min(1.0, p),
                      method=TestMethod.MONTE_CARLO, resamples_used=cfg.randomization_R,
                      effective_n=n, seed=cfg.seed)


def sign_test(d: Differences) -> TestResult:
    """
    Exact two-tailed sign test; zero differences are discarded.
    """
    d = _as_differences(d)
    x = d.values
    nonzero = x[x != 0.0]
    m = int(nonzero.size)
    if m == 0:
        return TestResult(test_name=TestName.SIGN, statistic=0.0, p_value=1.0,
                          method=TestMethod.DEGENERATE, effective_n=0)
    k = int(np.count_nonzero(nonzero > 0.0))
    # Depends on k only through min(k, m - k), so negating d gives the same p
    tail = float(stats.binom.cdf(min(k, m - k), m, 0.5))
    return TestResult(test_name=TestName.SIGN, statistic=float(k), p_value=min(1.0, 2.0 * tail),
                      method=TestMethod.EXACT, effective_n=m)


def signed_rank_distribution(m: int) -> np.ndarray:
    """Counts of each W+ value 0..m(m+1)/2 over the 2^m sign assignments of ranks 1..m."""
    top = m * (m + 1) // 2
    counts = np.zeros(top + 1, dtype=np.int64)
    counts[0] = 1
    for rank in range(1, m + 1):
        shifted = counts.copy()
        shifted[rank:] += counts[:-rank]
        counts = shifted
    return counts


def wilcoxon_signed_rank(d: Differences, cfg: ResamplingConfig) -> TestResult:
    """
    Wilcoxon signed-rank test; zero differences are discarded.

    Exact when the non-zero differences number at most exact_threshold and
    their magnitudes are tie-free; otherwise the normal approximation with
    tie-corrected variance and a 0.5 continuity correction.
    """
    d = _as_differences(d)
    x = d.values
    nonzero = x[x != 0.0]
    m = int(nonzero.size)
    if m == 0:
        return TestResult(test_name=TestName.WILCOXON, statistic=0.0, p_value=1.0,
                          method=TestMethod.DEGENERATE, effective_n=0)
    magnitudes = np.abs(nonzero)
    ranks = stats.rankdata(magnitudes, method="average")
    w_plus = float(ranks[nonzero > 0.0].sum())
    _, tie_sizes = np.unique(magnitudes, return_counts=True)
    has_ties = bool(np.any(tie_sizes > 1))

    if m <= cfg.exact_threshold and not has_ties:
        counts = signed_rank_distribution(m)
        total = 1 << m
        w = int(round(w_plus))
        lower = counts[: w + 1].sum() / total
        upper = counts[w:].sum() / total
        return TestResult(test_name=TestName.WILCOXON, statistic=w_plus, p_value=_two_tailed(lower, upper),
                          method=TestMethod.EXACT, resamples_used=total, effective_n=m)

    expected = m * (m + 1) / 4.0
    tie_term = float(np.sum(tie_sizes.astype(float) ** 3 - tie_sizes)) / 2.0
    variance = (m * (m + 1) * (2 * m + 1) - tie_term) / 24.0
    z = max(abs(w_plus - expected) - 0.5, 0.0) / np.sqrt(variance)
    p = 2.0 * float(stats.norm.sf(z))
    return TestResult(test_name=TestName.WILCOXON, statistic=w_plus, p_value=min(1.0, p),
                      method=TestMethod.NORMAL_APPROX, effective_n=m)


TEST_FUNCTIONS: Dict[TestName, Callable[[DifferenceVector, ResamplingConfig], TestResult]] = {
    TestName.T: lambda d, cfg: t_test_paired(d),
    TestName.BOOTSTRAP: bootstrap_shift_test,
    TestName.RANDOMIZATION: randomization_test,
    TestName.SIGN: lambda d, cfg: sign_test(d),
    TestName.WILCOXON: wilcoxon_signed_rank,
}


def run_all_tests(b: Sequence[float], e: Sequence[float], cfg: ResamplingConfig,
                  tests: Optional[Iterable[TestName]] = None) -> Dict[TestName, TestResult]:
    """
    Run the paired tests on d = e - b.

    Args:
        b: Baseline scores
        e: Experimental scores, paired with ``b`` by position
        cfg: Resampling configuration; its seed is shared by all tests
        tests: Subset of tests to run (all five by default)

    Returns:
        Dict mapping each test name to its result, in TestName order
    """
    d = DifferenceVector.from_scores(b, e)
    selected = list(TestName) if tests is None else [TestName(t) for t in tests]
    results = {}
    for name in TestName:
        if name in selected:
            result = TEST_FUNCTIONS[name](d, cfg)
            results[name] = result.model_copy(update={"seed": cfg.seed})
    return results
