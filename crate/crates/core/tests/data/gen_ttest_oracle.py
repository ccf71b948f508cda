"""Regenerates ttest_oracle.json: paired t statistics and two-sided p-values
computed with mpmath at 50 significant digits from the exact float64 inputs."""

import json
import random

import mpmath as mp

mp.mp.dps = 50


def reference(a, b):
    d = [mp.mpf(x) - mp.mpf(y) for x, y in zip(a, b)]
    n = len(d)
    mean = mp.fsum(d) / n
    var = mp.fsum((x - mean) ** 2 for x in d) / (n - 1)
    sd = mp.sqrt(var)
    t = mean / (sd / mp.sqrt(n))
    df = n - 1
    p = mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, df / (df + t * t), regularized=True)
    return mean, sd, t, df, p


def main():
    rng = random.Random(20240611)
    cases = []
    while len(cases) < 100:
        n = rng.randint(2, 50)
        scale = 10 ** rng.uniform(-2, 2)
        shift = rng.gauss(0, 1) * scale * rng.choice([0, 0.1, 0.5, 1, 3])
        a = [rng.gauss(50, 10) for _ in range(n)]
        b = [x - shift - rng.gauss(0, scale) for x in a]
        if len(set(x - y for x, y in zip(a, b))) < 2:
            continue
        mean, sd, t, df, p = reference(a, b)
        cases.append(
            {
                "a": a,
                "b": b,
                "mean_diff": mp.nstr(mean, 25),
                "sd_diff": mp.nstr(sd, 25),
                "t": mp.nstr(t, 25),
                "df": df,
                "p": mp.nstr(p, 25),
            }
        )
    with open("ttest_oracle.json", "w") as f:
        json.dump({"generator": "gen_ttest_oracle.py", "dps": 50, "cases": cases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
