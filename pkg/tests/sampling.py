"""Deterministic parameter samplers for classifier cross-checks."""

import math

import numpy as np

from choquard.regimes import PotentialSpec, ProblemParams
from theorem_table import lam_star


def _alphas(N):
    vals = {a for a in (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0) if a < N}
    if N > 2:
        vals.add(float(N - 2))
    return sorted(vals)


def _potentials(N, a, rng):
    kind = rng.choice(["zero", "fast", "hardy", "slow"])
    if kind == "zero":
        return PotentialSpec.zero(), dict(kind="zero")
    if kind == "fast":
        lam, g = float(rng.choice([0.5, 1.0, 2.0])), float(rng.choice([2.5, 3.0, 4.0]))
        return PotentialSpec.fast(lam, g), dict(kind="fast", lam=lam, g=g)
    if kind == "hardy":
        choices = [0.25, 0.5, 1.0, 1.5, 2.0]
        if N > 2:
            choices.append((N - 2) / 2)
        nu = float(rng.choice(choices))
        return PotentialSpec.hardy(nu), dict(kind="hardy", nu=nu)
    gs = [g for g in (-a, N - a, -a - 1.0, -3.0, -1.0, 0.0, 0.5, 1.0, 1.5) if g < 2]
    g = float(rng.choice(gs))
    lam = float(rng.choice([0.5, 1.0, 2.0, 3.0, lam_star(N, a)]))
    return PotentialSpec.slow(lam, g), dict(kind="slow", lam=lam, g=g)


def _critical_qs(N, a, p, pot):
    """q values placed exactly on the critical lines for this (N, a, p)."""
    qs = [1.0, 1.0 - p]
    if N > 2:
        qs += [a / (N - 2), (N + a) / (N - 2) - p, 1 - (N - a - 2) * p / N]
    if pot.variant == "hardy" and N >= 2:
        k = (N - 2) / 2 + pot.nu
        qs += [1 + (a + 2) / k - p, 1 + (a - (N - 2)) / k]
        if pot.nu < (N - 2) / 2:
            qs.append(1 - (N - a - 2) / ((N - 2) / 2 - pot.nu))
    if pot.variant == "slow":
        g = pot.gamma
        qs += [1 - (N - a - g) * p / N, 1 + g * p / a]
    return [q for q in qs if math.isfinite(q)]


def sample_tuples(n, seed=0, boundary_fraction=0.3):
    """``n`` tuples ``(ProblemParams, table kwargs)``; a fraction sits on critical lines."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        N = int(rng.integers(1, 7))
        a = float(rng.choice(_alphas(N)))
        pot, kw = _potentials(N, a, rng)
        p = float(rng.integers(1, 49)) / 8
        if rng.random() < boundary_fraction:
            if N > 2 and rng.random() < 0.2:
                p = a / (N - 2)
            q = float(rng.choice(_critical_qs(N, a, p, pot)))
        else:
            q = float(rng.integers(-16, 33)) / 8
        out.append((ProblemParams(N, a, p, q, pot), dict(N=N, a=a, p=p, q=q, **kw)))
    return out
