"""Per-block weight statistics: histograms, entropies, mutual information, moments.

All entropies are in nats unless a ``log_base`` is given. Histograms use K
equal-width bins over ``[lo, hi]``; a value equal to ``hi`` lands in the last
bin, and a degenerate range (``lo == hi``) puts every value in bin 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .exceptions import (
    DegenerateKurtosis,
    DegenerateMagnitude,
    EmptyInput,
    InvalidBinCount,
    NonFiniteWeight,
    NormalizationUndefined,
)

DEFAULT_BINS = 256


@dataclass
class Histogram:
    counts: np.ndarray
    edges: np.ndarray
    total: int

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInput("cannot build a histogram from zero values")
    return arr


def _check_bins(n_bins) -> int:
    if isinstance(n_bins, bool) or int(n_bins) != n_bins or n_bins < 1:
        raise InvalidBinCount(f"bin count must be a positive integer, got {n_bins!r}")
    return int(n_bins)


def value_range(values) -> tuple[float, float]:
    arr = _as_values(values)
    lo, hi = float(arr.min()), float(arr.max())
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise NonFiniteWeight("weights contain NaN or infinity")
    return lo, hi


def bin_edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    if hi == lo:
        # unit-width bins so bin 0 = [lo, lo + 1) holds the constant value
        return lo + np.arange(n_bins + 1, dtype=np.float64)
    edges = lo + (hi - lo) * (np.arange(n_bins + 1, dtype=np.float64) / n_bins)
    edges[-1] = hi
    return edges


def bin_indices(values: np.ndarray, lo: float, hi: float, n_bins: int) -> np.ndarray:
    if hi == lo:
        return np.zeros(values.shape, dtype=np.intp)
    t = np.floor((values - lo) / (hi - lo) * n_bins)
    return np.clip(t, 0, n_bins - 1).astype(np.intp)


def build_histogram(values, n_bins: int = DEFAULT_BINS, bounds: tuple[float, float] | None = None) -> Histogram:
    """Count values into ``n_bins`` equal-width bins.

    The range defaults to the values' own ``[min, max]`` (per-block relative
    binning); pass ``bounds`` to bin against a shared range instead.
    """
    n_bins = _check_bins(n_bins)
    arr = _as_values(values)
    lo, hi = value_range(arr) if bounds is None else bounds
    if np.isnan(arr).any():
        raise NonFiniteWeight("weights contain NaN")
    counts = np.bincount(bin_indices(arr, lo, hi, n_bins), minlength=n_bins).astype(np.int64)
    return Histogram(counts, bin_edges(lo, hi, n_bins), int(arr.size))


class HistogramAccumulator:
    """Chunked histogram over a fixed range; also tracks per-bin magnitude mass.

    Counts are integers, so any chunking gives bit-identical counts.
    """

    def __init__(self, lo: float, hi: float, n_bins: int = DEFAULT_BINS):
        self.lo, self.hi = float(lo), float(hi)
        self.n_bins = _check_bins(n_bins)
        self.counts = np.zeros(self.n_bins, dtype=np.int64)
        self.magnitude = np.zeros(self.n_bins, dtype=np.float64)

    def add(self, chunk) -> "HistogramAccumulator":
        arr = np.asarray(chunk, dtype=np.float64).ravel()
        if arr.size == 0:
            return self
        if np.isnan(arr).any():
            raise NonFiniteWeight("weights contain NaN")
        idx = bin_indices(arr, self.lo, self.hi, self.n_bins)
        self.counts += np.bincount(idx, minlength=self.n_bins)
        self.magnitude += np.bincount(idx, weights=np.abs(arr), minlength=self.n_bins)
        return self

    def histogram(self) -> Histogram:
        return Histogram(self.counts.copy(), bin_edges(self.lo, self.hi, self.n_bins), int(self.counts.sum()))


def entropy_of_masses(masses, log_base: float | None = None) -> float:
    """Shannon entropy of a non-negative mass vector; empty cells contribute 0."""
    m = np.asarray(masses, dtype=np.float64)
    total = m.sum()
    p = m[m > 0] / total
    h = float(-(p * np.log(p)).sum())
    h = max(h, 0.0)
    return h / math.log(log_base) if log_base else h


def weight_number_entropy(h: Histogram | Iterable[int], log_base: float | None = None) -> float:
    counts = h.counts if isinstance(h, Histogram) else h
    return entropy_of_masses(counts, log_base)


def magnitude_weighted_entropy(values, n_bins: int = DEFAULT_BINS, bounds=None, log_base=None) -> float:
    """Entropy of per-bin absolute-value mass ``S(i) / sum(S)``."""
    n_bins = _check_bins(n_bins)
    arr = _as_values(values)
    lo, hi = value_range(arr) if bounds is None else bounds
    mass = np.bincount(bin_indices(arr, lo, hi, n_bins), weights=np.abs(arr), minlength=n_bins)
    if not mass.sum() > 0:
        raise DegenerateMagnitude("every weight is zero; magnitude distribution undefined")
    return entropy_of_masses(mass, log_base)


def mutual_information(joint, log_base: float | None = None) -> float:
    """I(X;Z) from a joint mass table (rows X, columns Z), via sum p log(p / (px pz))."""
    j = np.asarray(joint, dtype=np.float64)
    p = j / j.sum()
    px = p.sum(axis=1, keepdims=True)
    pz = p.sum(axis=0, keepdims=True)
    nz = p > 0
    mi = float((p[nz] * np.log(p[nz] / (px * pz)[nz])).sum())
    mi = max(mi, 0.0)
    return mi / math.log(log_base) if log_base else mi


def _one_vs_rest(block_values, rest_values, n_bins, weighted):
    n_bins = _check_bins(n_bins)
    b = _as_values(block_values)
    r = _as_values(rest_values)
    lo = min(value_range(b)[0], value_range(r)[0])
    hi = max(value_range(b)[1], value_range(r)[1])
    wb = np.abs(b) if weighted else None
    wr = np.abs(r) if weighted else None
    cb = np.bincount(bin_indices(b, lo, hi, n_bins), weights=wb, minlength=n_bins)
    cr = np.bincount(bin_indices(r, lo, hi, n_bins), weights=wr, minlength=n_bins)
    if weighted and not (cb.sum() + cr.sum()) > 0:
        raise DegenerateMagnitude("every weight is zero; magnitude distribution undefined")
    return np.column_stack([cb, cr])


def mi_number(block_values, rest_values, n_bins: int = DEFAULT_BINS, log_base=None) -> float:
    """MI between bin index and block membership, count-weighted, over the union range."""
    return mutual_information(_one_vs_rest(block_values, rest_values, n_bins, False), log_base)


def mi_value(block_values, rest_values, n_bins: int = DEFAULT_BINS, log_base=None) -> float:
    """As :func:`mi_number` but each cell's mass is the sum of |w| falling in it."""
    return mutual_information(_one_vs_rest(block_values, rest_values, n_bins, True), log_base)


@dataclass(frozen=True)
class BasicStats:
    mean_abs: float
    variance: float
    std: float
    l1: float
    l2: float
    max_abs: float
    zero_count: int
    n: int
    mean: float
    max: float
    kurtosis_value: float | None

    @property
    def kurtosis(self) -> float:
        """Pearson (non-excess) kurtosis; raises when the variance is zero."""
        if self.kurtosis_value is None:
            raise DegenerateKurtosis("kurtosis undefined for zero-variance weights")
        return self.kurtosis_value

    def as_dict(self) -> dict:
        return {
            "mean_abs": self.mean_abs,
            "variance": self.variance,
            "std": self.std,
            "l1": self.l1,
            "l2": self.l2,
            "max_abs": self.max_abs,
            "kurtosis": self.kurtosis_value,
            "zero_count": self.zero_count,
            "mean": self.mean,
            "max": self.max,
        }


class MomentAccumulator:
    """Streaming central moments up to order 4 with pairwise merging (Pébay 2008)."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = self.m3 = self.m4 = 0.0
        self.abs_sum = 0.0
        self.sq_sum = 0.0
        self.max_abs = 0.0
        self.max = -math.inf
        self.min = math.inf
        self.zeros = 0

    def add(self, chunk) -> "MomentAccumulator":
        x = np.asarray(chunk, dtype=np.float64).ravel()
        if x.size == 0:
            return self
        lo, hi = float(x.min()), float(x.max())
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise NonFiniteWeight("weights contain NaN or infinity")
        other = MomentAccumulator()
        other.n = int(x.size)
        if lo == hi:
            other.mean = lo
        else:
            other.mean = float(x.mean())
            d = x - other.mean
            d2 = d * d
            other.m2 = float(d2.sum())
            other.m3 = float((d2 * d).sum())
            other.m4 = float((d2 * d2).sum())
        a = np.abs(x)
        other.abs_sum = float(a.sum())
        other.sq_sum = float((x * x).sum())
        other.max_abs = float(a.max())
        other.max, other.min = hi, lo
        other.zeros = int(np.count_nonzero(x == 0.0))
        return self.merge(other)

    def merge(self, o: "MomentAccumulator") -> "MomentAccumulator":
        if o.n == 0:
            return self
        if self.n == 0:
            self.__dict__.update(o.__dict__)
            return self
        na, nb = self.n, o.n
        n = na + nb
        delta = o.mean - self.mean
        d_n = delta / n
        m2 = self.m2 + o.m2 + delta * d_n * na * nb
        m3 = (
            self.m3 + o.m3
            + delta * d_n * d_n * na * nb * (na - nb)
            + 3.0 * d_n * (na * o.m2 - nb * self.m2)
        )
        m4 = (
            self.m4 + o.m4
            + delta * d_n * d_n * d_n * na * nb * (na * na - na * nb + nb * nb)
            + 6.0 * d_n * d_n * (na * na * o.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * o.m3 - nb * self.m3)
        )
        self.mean = self.mean + d_n * nb if delta else self.mean
        self.n, self.m2, self.m3, self.m4 = n, m2, m3, m4
        self.abs_sum += o.abs_sum
        self.sq_sum += o.sq_sum
        self.max_abs = max(self.max_abs, o.max_abs)
        self.max = max(self.max, o.max)
        self.min = min(self.min, o.min)
        self.zeros += o.zeros
        return self

    def finalize(self) -> BasicStats:
        if self.n == 0:
            raise EmptyInput("no values accumulated")
        var = max(self.m2 / self.n, 0.0)
        kurt = self.n * self.m4 / (self.m2 * self.m2) if self.m2 > 0 else None
        return BasicStats(
            mean_abs=self.abs_sum / self.n,
            variance=var,
            std=math.sqrt(var),
            l1=self.abs_sum,
            l2=math.sqrt(self.sq_sum),
            max_abs=self.max_abs,
            zero_count=self.zeros,
            n=self.n,
            mean=self.mean,
            max=self.max,
            kurtosis_value=kurt,
        )


def basic_stats(values) -> BasicStats:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInput("basic_stats needs at least one value")
    return MomentAccumulator().add(arr).finalize()


def minmax_normalize(scores: Mapping[int, float]) -> dict[int, float]:
    """Rescale to [0, 1]; a constant score map becomes all 0.5."""
    if len(scores) < 2:
        raise NormalizationUndefined(f"min-max normalization needs at least 2 blocks, got {len(scores)}")
    lo, hi = min(scores.values()), max(scores.values())
    if hi == lo:
        return {k: 0.5 for k in scores}
    span = hi - lo
    return {k: (v - lo) / span for k, v in scores.items()}
