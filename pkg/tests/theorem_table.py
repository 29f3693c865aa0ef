"""Second, independently written predicate table for the classifier.

Each function encodes one theorem as a plain predicate and returns
``(existence, decay)`` where ``decay`` is ``None`` or a tuple
``(variant, numbers...)``.  No code is shared with ``choquard.regimes``.
"""

import math

import mpmath
from fractions import Fraction


# Comparisons are exact on rationals; two values are equal when their
# correctly rounded doubles coincide.
def _r(x):
    return float(x)


def GT(x, y):
    return _r(x) > _r(y)


def GE(x, y):
    return _r(x) >= _r(y)


def EQ(x, y):
    return _r(x) == _r(y)


def LT(x, y):
    return _r(x) < _r(y)


def lam_star(N, a):
    N, a = mpmath.mpf(float(N)), mpmath.mpf(float(a))
    with mpmath.workdps(40):
        return float(2 ** (-a / 2) * mpmath.gamma((N - a) / 4) / mpmath.gamma((N + a) / 4))


def at_lam_star(lam, ls):
    return abs(lam - ls) <= 4 * math.ulp(ls)


# --- Laplacian and fast decay potentials -------------------------------------


def free_theorem(N, a, p, q):
    if N in (1, 2):
        return ("NotExists", None)
    ok = GT(p, a / (N - 2)) and GT(p + q, (N + a) / (N - 2))
    if GT(a, N - 2):
        ok = ok and GT(q, a / (N - 2))
    if EQ(a, N - 2):
        ok = ok and GE(q, 1)
    if LT(a, N - 2):
        ok = ok and GT(q, 1 - (N - a - 2) * p / N)
    if not ok:
        return ("NotExists", None)
    s = a / (N - 2)
    if GT(q, s):
        return ("Exists", ("Power", N - 2))
    if EQ(q, s) and EQ(s, 1):
        return ("Exists", ("PowerFamily", N - 2))
    if EQ(q, s):
        return ("Exists", ("PowerLog", N - 2, (N - 2) / (N - a - 2)))
    return ("Exists", ("Power", (N - a - 2) / (1 - q)))


def fast_theorem(N, a, p, q):
    if N < 3:
        return ("Open", None)
    return free_theorem(N, a, p, q)


# --- Hardy potentials ----------------------------------------------------------


def hardy_theorem(N, a, p, q, nu):
    if N == 1:
        return ("Open", None)
    h = (N - 2) / 2
    k = h + nu
    conds = [GT(p, a / k), GT(p + q, 1 + (a + 2) / k)]
    if GT(a, N - 2):
        conds.append(GT(q, 1 + (a - (N - 2)) / k))
    elif EQ(a, N - 2):
        conds.append(GE(q, 1))
    else:
        conds.append(GT(q, 1 - (N - a - 2) / N * p))
        if LT(nu, h):
            conds.append(GT(q, 1 - (N - a - 2) / (h - nu)))
    if not all(conds):
        return ("NotExists", None)
    crit = 1 + (a - (N - 2)) / k
    if GT(q, crit):
        return ("Exists", ("Power", k))
    if EQ(q, 1) and EQ(a, N - 2):
        return ("Exists", ("PowerFamily", k))
    if EQ(q, crit):
        return ("Exists", ("PowerLog", k, k / (N - a - 2)))
    return ("Exists", ("Power", (N - a - 2) / (1 - q)))


# --- slow decay potentials -------------------------------------------------------


def exp_theorem(N, a, p, q, lam, g):
    """q > 1."""
    return ("Exists", ("ExpPlain", (N - 1) / 2 - g / 4, 2 * lam / (2 - g), (2 - g) / 2, False))


def exp_plus_theorem(N, a, p, q, lam, g):
    """q == 1."""
    if GT(g, N - a):
        return ("NotExists", None)
    pref = (N - 1) / 2 - g / 4
    if EQ(g, N - a):
        return ("Exists", ("ExpPlain", pref, 2 * lam / (2 - g), (2 - g) / 2, True))
    return ("Exists", ("ExpPsi", pref, g, N - a, lam, True))


def slow_theorem(N, a, p, q, lam, g):
    """q < 1, N - 2 < a, N - a <= g < 2: always NotExists."""
    return ("NotExists", None)


def slow_moderate_theorem(N, a, p, q, lam, g):
    if GT(q, 1 - (N - a - g) / N * p):
        return ("Exists", ("Power", (N - a - g) / (1 - q)))
    return ("NotExists", None)


def slow_fast_theorem(N, a, p, q, lam, g):
    if not GT(q, 1 + g / a * p):
        return ("NotExists", None)
    mid = 1 - (N - a - g) / N * p
    if GT(q, mid):
        return ("Exists", ("Power", (N - a - g) / (1 - q)))
    if EQ(q, mid):
        return ("Exists", ("PowerLog", N / p, 1 / (1 - q - p)))
    return ("Exists", ("Power", -(a + g) / (1 - q - p)))


def homogeneous_theorem(N, a, p, q, lam, g):
    """p + q == 1."""
    dec = ("Power", N / (1 - q))
    if GT(a, -g):
        return ("NotExists", None)
    if LT(a, -g):
        return ("ThresholdDependent", dec)
    ls = lam_star(N, a)
    if at_lam_star(lam, ls):
        return ("Open", None)
    if lam > ls:
        return ("ThresholdDependent", dec)
    if N >= 2:
        return ("NotExists", None)
    return ("Open", None)


def slow_dispatch(N, a, p, q, lam, g):
    if GT(q, 1):
        return exp_theorem(N, a, p, q, lam, g)
    if EQ(q, 1):
        return exp_plus_theorem(N, a, p, q, lam, g)
    if EQ(p + q, 1):
        return homogeneous_theorem(N, a, p, q, lam, g)
    if LT(N - 2, a) and GE(g, N - a):
        return slow_theorem(N, a, p, q, lam, g)
    if LT(-a, g):
        return slow_moderate_theorem(N, a, p, q, lam, g)
    return slow_fast_theorem(N, a, p, q, lam, g)


def table(N, a, p, q, kind, lam=0.0, g=0.0, nu=0.0):
    N, a, p, q, g, nu = (Fraction(x) for x in (N, a, p, q, g, nu))
    if kind == "zero":
        return free_theorem(N, a, p, q)
    if kind == "fast":
        return fast_theorem(N, a, p, q)
    if kind == "hardy":
        return hardy_theorem(N, a, p, q, nu)
    return slow_dispatch(N, a, p, q, lam, g)


def verdict_signature(v):
    """Convert a ``choquard.regimes.Verdict`` to the table's tuple format."""
    if v.decay is None or v.existence not in ("Exists", "ThresholdDependent"):
        return (v.existence, None)
    d = v.decay
    if d.variant in ("Power", "PowerFamily"):
        return (v.existence, (d.variant, d.e))
    if d.variant == "PowerLog":
        return (v.existence, (d.variant, d.e, d.ell))
    if d.variant == "ExpPlain":
        return (v.existence, (d.variant, d.prefactor_power, d.rate, d.power, d.m_family))
    return (v.existence, (d.variant, d.prefactor_power, d.gamma, d.sigma, d.lam, d.m_family))
