import math
from typing import Sequence, Tuple
import numpy as np
from scipy.special import betainc
from ..models import TTestResult
from .errors import SampleSizeError

BOOTSTRAP_CHUNK = 5_000_000


def _check_sizes(a: np.ndarray, b: np.ndarray) -> None:
    if len(a) < 2 or len(b) < 2:
        raise SampleSizeError((len(a), len(b)))


def two_sided_p(t: float, df: float) -> float:
    # P(|T| >= |t|) for Student's t with df degrees of freedom
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def _degenerate(mean_a: float, mean_b: float, df: float) -> TTestResult:
    if mean_a == mean_b:
        return TTestResult(t=0.0, df=df, p=1.0, degenerate=True)
    return TTestResult(t=math.copysign(math.inf, mean_a - mean_b), df=df, p=0.0, degenerate=True)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed t-test with unequal variances and Welch-Satterthwaite degrees of freedom.

    Two zero-variance samples give p = 0 (or p = 1 when the means agree) with
    `degenerate` set.

    Raises:
        SampleSizeError when either sample has fewer than 2 values
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_sizes(a, b)
    na, nb = len(a), len(b)
    sa, sb = a.var(ddof=1) / na, b.var(ddof=1) / nb
    se2 = sa + sb
    if se2 == 0:
        return _degenerate(float(a.mean()), float(b.mean()), float(na + nb - 2))
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    df = float(se2 ** 2 / (sa ** 2 / (na - 1) + sb ** 2 / (nb - 1)))
    return TTestResult(t=t, df=df, p=two_sided_p(t, df))


def equal_var_t_test(a: Sequence[float], b: Sequence[float], one_tailed: bool = False) -> TTestResult:
    """Student's pooled-variance t-test; the one-tailed alternative is mean(a) > mean(b).

    Raises:
        SampleSizeError when either sample has fewer than 2 values
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_sizes(a, b)
    na, nb = len(a), len(b)
    df = float(na + nb - 2)
    pooled = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / df
    if pooled == 0:
        result = _degenerate(float(a.mean()), float(b.mean()), df)
        if not one_tailed:
            return result
        p = 0.5 if result.t == 0 else (0.0 if result.t > 0 else 1.0)
        return TTestResult(t=result.t, df=df, p=p, degenerate=True)
    t = float((a.mean() - b.mean()) / math.sqrt(pooled * (1.0 / na + 1.0 / nb)))
    p = two_sided_p(t, df)
    if one_tailed:
        p = p / 2.0 if t >= 0 else 1.0 - p / 2.0
    return TTestResult(t=t, df=df, p=p)


def bootstrap_mean_ci(values: Sequence[float], replicates: int = 1000, seed: int = 0, level: float = 0.95) -> Tuple[float, float, float]:
    """Mean and percentile bootstrap interval from resampling with replacement.

    The interval is widened, if needed, to contain the mean.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise SampleSizeError((0,))
    mean = float(values.mean())
    rng = np.random.default_rng(seed)
    n = len(values)
    chunk = max(1, BOOTSTRAP_CHUNK // n)
    means = []
    for done in range(0, replicates, chunk):
        size = min(chunk, replicates - done)
        means.append(values[rng.integers(0, n, size=(size, n))].mean(axis=1))
    tail = (1.0 - level) / 2.0 * 100.0
    low, high = np.percentile(np.concatenate(means), [tail, 100.0 - tail])
    return mean, min(float(low), mean), max(float(high), mean)
