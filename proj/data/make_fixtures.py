#!/usr/bin/env python3
"""Regenerates the synthetic fixtures in this directory (stdlib only)."""

import csv
import math
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

HERE = Path(__file__).resolve().parent


def hourly_walk(path, start, hours, vol_at, seed, assets=("close_a", "close_b")):
    rng = random.Random(seed)
    prices = [100.0, 50.0][: len(assets)]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp", *assets])
        for i in range(hours + 1):
            if i:
                s = vol_at(i)
                prices = [p * math.exp(s * rng.gauss(0.0, 1.0)) for p in prices]
            t = start + timedelta(hours=i)
            w.writerow([t.strftime("%Y-%m-%dT%H:%M:%SZ"), *(f"{p:.10g}" for p in prices)])


def wishart_int(rng, df, d=2):
    s = [[0.0] * d for _ in range(d)]
    for _ in range(df):
        z = [rng.gauss(0.0, 1.0) for _ in range(d)]
        for i in range(d):
            for j in range(d):
                s[i][j] += z[i] * z[j] / df
    return s


def cov_uniform(rng, nvec, d=2):
    v = [[rng.random() for _ in range(d)] for _ in range(nvec)]
    mean = [sum(r[j] for r in v) / nvec for j in range(d)]
    return [[sum((r[i] - mean[i]) * (r[j] - mean[j]) for r in v) / (nvec - 1) for j in range(d)] for i in range(d)]


def write_matrices(path, mats, source):
    with open(path, "w") as f:
        f.write(f"# {source}\n")
        f.write("id,m,v11,v12,v22\n")
        for k, m in enumerate(mats, 1):
            f.write(f"{k},2,{m[0][0]:.17g},{m[0][1]:.17g},{m[1][1]:.17g}\n")


def main():
    utc = timezone.utc
    jan = datetime(2019, 1, 1, tzinfo=utc)
    # 60 days of hourly closes, per-hour log volatility x5 from day 31 on
    hourly_walk(HERE / "two_regime.csv", jan, 60 * 24, lambda i: 0.01 if i <= 30 * 24 else 0.05, 101)
    hourly_walk(HERE / "single_regime.csv", jan, 60 * 24, lambda i: 0.01, 202)
    # 2019-01-01T00:00Z .. 2019-03-01T00:00Z: 1417 closes, 1416 returns, 59 blocks of 24
    hourly_walk(HERE / "calendar_59d.csv", jan, 59 * 24, lambda i: 0.01, 303)

    rng = random.Random(404)
    write_matrices(HERE / "w_sample.csv", [wishart_int(rng, 3) for _ in range(30)], "W2(3, I/3) draws, df 3")
    write_matrices(HERE / "cmu_sample.csv", [cov_uniform(rng, 3) for _ in range(30)], "CMU2 draws, 3 vectors")


if __name__ == "__main__":
    main()
