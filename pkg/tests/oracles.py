"""Independent reference computations used to pin expected values.

Everything here is deliberately naive (pure Python loops, struct-level
decoding, exhaustive enumeration) and shares no code with the package.
"""
import itertools
import math
import struct
from fractions import Fraction


def entropy_from_counts(counts):
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log(p)
    return h


def joint_mi(table):
    """I(X;Z) = H(X) + H(Z) - H(X,Z) from a 2-D table of non-negative masses."""
    flat = [v for row in table for v in row]
    rows = [sum(row) for row in table]
    cols = [sum(col) for col in zip(*table)]
    return entropy_from_counts(rows) + entropy_from_counts(cols) - entropy_from_counts(flat)


def naive_bins(values, k, lo=None, hi=None):
    """Equal-width bin assignment, last edge closed; constant input -> bin 0."""
    lo = min(values) if lo is None else lo
    hi = max(values) if hi is None else hi
    out = []
    for v in values:
        if hi == lo:
            out.append(0)
            continue
        i = int(math.floor((v - lo) / (hi - lo) * k))
        out.append(min(max(i, 0), k - 1))
    return out


def f32_bits_to_float(bits):
    sign = -1.0 if bits >> 31 else 1.0
    exp = (bits >> 23) & 0xFF
    frac = bits & 0x7FFFFF
    if exp == 0xFF:
        return math.nan if frac else sign * math.inf
    if exp == 0:
        return sign * math.ldexp(frac, -149)
    return sign * math.ldexp(frac | 0x800000, exp - 150)


def f16_bits_to_float(bits):
    sign = -1.0 if bits >> 15 else 1.0
    exp = (bits >> 10) & 0x1F
    frac = bits & 0x3FF
    if exp == 0x1F:
        return math.nan if frac else sign * math.inf
    if exp == 0:
        return sign * math.ldexp(frac, -24)
    return sign * math.ldexp(frac | 0x400, exp - 25)


def bf16_bits_to_float(bits):
    return f32_bits_to_float(bits << 16)


def decode_bytes(dtype, raw):
    if dtype == "F64":
        return [v for (v,) in struct.iter_unpack("<d", raw)]
    if dtype == "F32":
        return [f32_bits_to_float(b) for (b,) in struct.iter_unpack("<I", raw)]
    if dtype == "F16":
        return [f16_bits_to_float(b) for (b,) in struct.iter_unpack("<H", raw)]
    if dtype == "BF16":
        return [bf16_bits_to_float(b) for (b,) in struct.iter_unpack("<H", raw)]
    raise ValueError(dtype)


def two_pass_stats(values):
    n = len(values)
    mean = math.fsum(values) / n
    m2 = math.fsum((v - mean) ** 2 for v in values) / n
    m4 = math.fsum((v - mean) ** 4 for v in values) / n
    return {
        "mean_abs": math.fsum(abs(v) for v in values) / n,
        "variance": m2,
        "std": math.sqrt(m2),
        "l1": math.fsum(abs(v) for v in values),
        "l2": math.sqrt(math.fsum(v * v for v in values)),
        "max_abs": max(abs(v) for v in values),
        "kurtosis": m4 / (m2 * m2) if m2 > 0 else None,
        "zero_count": sum(1 for v in values if v == 0.0),
    }


def spearman_exact(a, b):
    """Tie-free Spearman as an exact rational: 1 - 6 sum d^2 / (n (n^2 - 1))."""
    n = len(a)
    d2 = sum((x - y) ** 2 for x, y in zip(a, b))
    return 1 - Fraction(6 * d2, n * (n * n - 1))


def kendall_pairs(a, b):
    """Kendall tau-a by enumerating every unordered pair."""
    n = len(a)
    score = 0
    for i, j in itertools.combinations(range(n), 2):
        s = (a[i] - a[j]) * (b[i] - b[j])
        score += (s > 0) - (s < 0)
    return Fraction(score, n * (n - 1) // 2)
