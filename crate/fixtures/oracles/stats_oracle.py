"""Reference values for the Wilson interval, Pearson's r and Welch's t-test.

Computed with mpmath at 50 significant digits from the textbook definitions:
the normal quantile via erfinv and t-distribution tails by numerical
integration of the density. Inputs are short decimals so both sides read the
same numbers. Rerun to regenerate stats_cases.json.
"""

import json
import random
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50


def z_for(level):
    return mp.sqrt(2) * mp.erfinv(mp.mpf(level))


def wilson(k, n, level):
    z = z_for(level)
    n = mp.mpf(n)
    p = k / n
    denom = 1 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z / denom * mp.sqrt(p * (1 - p) / n + z**2 / (4 * n**2))
    return max(center - half, mp.mpf(0)), min(center + half, mp.mpf(1))


def t_two_sided(t, df):
    t = abs(t)
    c = mp.gamma((df + 1) / 2) / (mp.sqrt(df * mp.pi) * mp.gamma(df / 2))
    density = lambda u: c * (1 + u**2 / df) ** (-(df + 1) / 2)
    return 2 * mp.quad(density, [t, t + 10, mp.inf])


def mean(xs):
    return mp.fsum(xs) / len(xs)


def pearson(x, y):
    mx, my = mean(x), mean(y)
    sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = mp.fsum((a - mx) ** 2 for a in x)
    syy = mp.fsum((b - my) ** 2 for b in y)
    r = sxy / mp.sqrt(sxx * syy)
    df = len(x) - 2
    t = r * mp.sqrt(df / (1 - r**2))
    return r, t_two_sided(t, mp.mpf(df))


def welch(a, b):
    na, nb = len(a), len(b)
    ma, mb = mean(a), mean(b)
    va = mp.fsum((v - ma) ** 2 for v in a) / (na - 1) / na
    vb = mp.fsum((v - mb) ** 2 for v in b) / (nb - 1) / nb
    t = (ma - mb) / mp.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (na - 1) + vb**2 / (nb - 1))
    return t, df, t_two_sided(t, df)


def dec(x, places=3):
    return f"{x:.{places}f}"


def main():
    rng = random.Random(20240611)
    out = {"wilson": [], "pearson": [], "welch": []}
    for _ in range(50):
        n = rng.randint(1, 400)
        k = rng.randint(0, n)
        level = rng.choice([0.8, 0.9, 0.95, 0.99])
        lo, hi = wilson(k, n, level)
        out["wilson"].append({"k": k, "n": n, "level": level, "low": float(lo), "high": float(hi)})
    for _ in range(50):
        n = rng.randint(4, 40)
        rho = rng.uniform(-0.9, 0.9)
        xs = [rng.gauss(0, 1) for _ in range(n)]
        ys = [rho * x + (1 - rho**2) ** 0.5 * rng.gauss(0, 1) for x in xs]
        x = [dec(v) for v in xs]
        y = [dec(v) for v in ys]
        r, p = pearson([mp.mpf(v) for v in x], [mp.mpf(v) for v in y])
        out["pearson"].append({"x": x, "y": y, "r": float(r), "p": float(p)})
    for _ in range(50):
        na, nb = rng.randint(2, 30), rng.randint(2, 30)
        shift = rng.uniform(-1.5, 1.5)
        a = [dec(rng.gauss(shift, rng.uniform(0.5, 2))) for _ in range(na)]
        b = [dec(rng.gauss(0, rng.uniform(0.5, 2))) for _ in range(nb)]
        t, df, p = welch([mp.mpf(v) for v in a], [mp.mpf(v) for v in b])
        out["welch"].append({"a": a, "b": b, "t": float(t), "df": float(df), "p": float(p)})
    path = Path(__file__).with_name("stats_cases.json")
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
