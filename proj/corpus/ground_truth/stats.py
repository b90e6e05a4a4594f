import math


def mean(values):
    if not values:
        raise ValueError("mean of empty list")
    return sum(values) / len(values)


def variance(values):
    m = mean(values)
    total = 0.0
    for v in values:
        total += (v - m) ** 2
    return total / len(values)


def stddev(values):
    return math.sqrt(variance(values))


def median(values):
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("median of empty list")
    mid = n // 2
    if n % 2 == 1:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


def percentile(values, p):
    ordered = sorted(values)
    if not ordered:
        raise ValueError("percentile of empty list")
    rank = math.ceil(p * len(ordered))
    rank = min(max(rank, 1), len(ordered))
    return ordered[rank - 1]


def histogram(values, buckets):
    low = min(values)
    high = max(values)
    width = (high - low) / buckets or 1
    counts = [0] * buckets
    for v in values:
        index = int((v - low) / width)
        if index == buckets:
            index -= 1
        counts[index] += 1
    return counts


def correlation(xs, ys):
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    mx = mean(xs)
    my = mean(ys)
    num = 0.0
    dx = 0.0
    dy = 0.0
    for x, y in zip(xs, ys):
        num += (x - mx) * (y - my)
        dx += (x - mx) ** 2
        dy += (y - my) ** 2
    if dx == 0 or dy == 0:
        return 0.0
    return num / math.sqrt(dx * dy)
