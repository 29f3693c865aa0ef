"""Riesz potential constants, radial convolution and tail envelopes.

The Riesz kernel in R^N is ``I_alpha(x) = A_alpha |x|^(alpha - N)``.  For
radial inputs the convolution reduces to a one dimensional integral whose
kernel is the spherical mean of ``|x - y|^(alpha - N)``.  That mean has the
closed form ``max(r, s)^(alpha - N) * 2F1((N - alpha)/2, 1 - alpha/2; N/2; t^2)``
with ``t = min(r, s) / max(r, s)``, which is what this module evaluates.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import integrate, special

from .errors import DomainError, QuadratureFailure, TailDivergence

LN10 = math.log(10.0)


@dataclass(frozen=True)
class RieszParams:
    """Dimension ``N`` and order ``alpha`` of the Riesz kernel."""

    dim: int
    alpha: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim}")
        if not (0.0 < self.alpha < self.dim):
            raise DomainError(f"alpha must lie in (0, N) = (0, {self.dim}), got {self.alpha}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "alpha", float(self.alpha))


def normalization_constant(params: RieszParams) -> float:
    """Return ``A_alpha = Gamma((N-alpha)/2) / (Gamma(alpha/2) pi^(N/2) 2^alpha)``."""
    N, a = params.dim, params.alpha
    return special.gamma((N - a) / 2) / (special.gamma(a / 2) * math.pi ** (N / 2) * 2.0**a)


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere in ``R^dim``."""
    return 2.0 * math.pi ** (dim / 2) / special.gamma(dim / 2)


def sigma(params: RieszParams, beta: float) -> float:
    """Constant in ``I_alpha * |y|^-beta = sigma(beta) |x|^(alpha - beta)``."""
    N, a = params.dim, params.alpha
    if not (a < beta < N):
        raise DomainError(f"beta must lie in (alpha, N) = ({a}, {N}), got {beta}")
    g = special.gamma
    return 2.0**-a * g((beta - a) / 2) * g((N - beta) / 2) / (g((N - beta + a) / 2) * g(beta / 2))


def sigma_star(params: RieszParams) -> float:
    """Minimum of ``sigma`` over beta, attained at ``beta = (N + alpha)/2``."""
    return sigma(params, (params.dim + params.alpha) / 2)


def lambda_star(params: RieszParams) -> float:
    """``2^(-alpha/2) Gamma((N-alpha)/4) / Gamma((N+alpha)/4)``; its square is ``sigma_star``."""
    N, a = params.dim, params.alpha
    return 2.0 ** (-a / 2) * special.gamma((N - a) / 4) / special.gamma((N + a) / 4)


def semigroup_oracle(params: RieszParams, beta: float, r):
    """Exact value of ``I_alpha * |y|^-beta`` at radius ``r``."""
    return sigma(params, beta) * np.asarray(r, dtype=float) ** (params.alpha - beta)


# ---------------------------------------------------------------------------
# envelopes


def _log1(r):
    return np.log(np.e + r)


@dataclass(frozen=True)
class EnvelopeClass:
    """Asymptotic shape ``r^-e (log r)^s (log log r)^t exp(-rate r^k)``.

    ``compact`` marks functions that vanish beyond the last grid node.
    Logarithms are regularised as ``log(e + r)`` so shapes are positive on
    the whole half line; only the behaviour at infinity matters.
    """

    exponent: float = 0.0
    log_power: float = 0.0
    loglog_power: float = 0.0
    rate: float = 0.0
    exp_power: float = 1.0
    compact: bool = False

    @classmethod
    def power(cls, e: float) -> "EnvelopeClass":
        return cls(exponent=float(e))

    @classmethod
    def power_log(cls, e: float, s: float) -> "EnvelopeClass":
        return cls(exponent=float(e), log_power=float(s))

    @classmethod
    def log_log(cls, e: float, t: float = 1.0) -> "EnvelopeClass":
        return cls(exponent=float(e), loglog_power=float(t))

    @classmethod
    def exponential(cls, rate: float, exp_power: float = 1.0, exponent: float = 0.0) -> "EnvelopeClass":
        return cls(exponent=float(exponent), rate=float(rate), exp_power=float(exp_power))

    @classmethod
    def compact_support(cls) -> "EnvelopeClass":
        return cls(compact=True)

    def __post_init__(self):
        vals = (self.exponent, self.log_power, self.loglog_power, self.rate, self.exp_power)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("envelope exponents must be finite")
        if self.rate < 0 or self.exp_power <= 0:
            raise DomainError("exponential envelopes need rate >= 0 and a positive power")

    @property
    def kind(self) -> str:
        if self.compact:
            return "Compact"
        if self.rate > 0:
            return "Exponential"
        if self.loglog_power != 0:
            return "LogLog"
        if self.log_power != 0:
            return "PowerLog"
        return "Power"

    def log_shape(self, r):
        r = np.asarray(r, dtype=float)
        out = -self.exponent * np.log(r)
        if self.log_power:
            out = out + self.log_power * np.log(_log1(r))
        if self.loglog_power:
            out = out + self.loglog_power * np.log(_log1(np.log(_log1(r))))
        if self.rate:
            out = out - self.rate * r**self.exp_power
        return out

    def shape(self, r):
        return np.exp(self.log_shape(r))

    def order_key(self) -> tuple:
        """Sort key: a larger key decays faster at infinity."""
        exp_order = (self.exp_power, self.rate) if self.rate > 0 else (0.0, 0.0)
        return (int(self.compact), *exp_order, self.exponent, -self.log_power, -self.loglog_power)

    def times(self, other: "EnvelopeClass") -> "EnvelopeClass":
        if self.compact or other.compact:
            return EnvelopeClass.compact_support()
        rate, k = self.rate, self.exp_power
        if other.rate > 0:
            if rate == 0 or other.exp_power > k:
                rate, k = other.rate, other.exp_power
            elif other.exp_power == k:
                rate += other.rate
        return EnvelopeClass(
            exponent=self.exponent + other.exponent,
            log_power=self.log_power + other.log_power,
            loglog_power=self.loglog_power + other.loglog_power,
            rate=rate,
            exp_power=k,
        )

    def raised(self, p: float) -> "EnvelopeClass":
        if self.compact:
            if p <= 0:
                raise DomainError("cannot raise a compactly supported envelope to a nonpositive power")
            return self
        if p < 0 and self.rate > 0:
            return EnvelopeClass(exponent=self.exponent * p, log_power=self.log_power * p,
                                 loglog_power=self.loglog_power * p)
        return EnvelopeClass(
            exponent=self.exponent * p,
            log_power=self.log_power * p,
            loglog_power=self.loglog_power * p,
            rate=self.rate * p if p > 0 else 0.0,
            exp_power=self.exp_power,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "exponent": self.exponent,
            "log_power": self.log_power,
            "loglog_power": self.loglog_power,
            "rate": self.rate,
            "exp_power": self.exp_power,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvelopeClass":
        if d.get("kind") == "Compact":
            return cls.compact_support()
        return cls(
            exponent=d.get("exponent", 0.0),
            log_power=d.get("log_power", 0.0),
            loglog_power=d.get("loglog_power", 0.0),
            rate=d.get("rate", 0.0),
            exp_power=d.get("exp_power", 1.0),
        )


def asymptotic_envelope(env: EnvelopeClass, params: RieszParams) -> EnvelopeClass:
    """Envelope of ``I_alpha * v`` at infinity given the envelope of ``v``."""
    N, a = params.dim, params.alpha
    if env.compact or env.rate > 0:
        return EnvelopeClass.power(N - a)
    e = env.exponent
    if e < a or (e == a and (env.log_power >= -1 or env.loglog_power)):
        raise DomainError(f"envelope with exponent {e} <= alpha = {a}: the potential may diverge")
    if e > N:
        return EnvelopeClass.power(N - a)
    if e == N:
        if env.loglog_power:
            raise DomainError("no envelope rule for log-log inputs at the critical exponent")
        s = env.log_power
        if s < -1:
            return EnvelopeClass.power(N - a)
        if s == -1:
            return EnvelopeClass.log_log(N - a)
        return EnvelopeClass.power_log(N - a, s + 1)
    if e == a:
        # integrable logarithmic tail at the lower critical exponent
        return EnvelopeClass.power_log(0.0, env.log_power + 1)
    return EnvelopeClass(exponent=e - a, log_power=env.log_power, loglog_power=env.loglog_power)


def _tail_integrable(env: EnvelopeClass, threshold: float) -> bool:
    """Is ``int^inf s^(threshold - 1) * env(s) ds`` finite?"""
    if env.compact or env.rate > 0:
        return True
    e = env.exponent
    if e != threshold:
        return e > threshold
    if env.log_power != -1:
        return env.log_power < -1
    return env.loglog_power < -1


# ---------------------------------------------------------------------------
# radial functions


def log_grid(r0: float, r1: float, nodes_per_decade: float = 64) -> np.ndarray:
    """Log-uniform grid from ``r0`` to ``r1`` with about ``nodes_per_decade`` nodes per decade."""
    if not (0 < r0 < r1):
        raise DomainError("need 0 < r0 < r1")
    n = max(2, int(round(math.log10(r1 / r0) * nodes_per_decade)) + 1)
    return np.geomspace(r0, r1, n)


def log_step(grid: np.ndarray) -> float:
    """Common logarithmic spacing of ``grid``; raises if the grid is not log-uniform."""
    x = np.log(grid)
    d = np.diff(x)
    if d.size == 0 or np.any(d <= 0):
        raise DomainError("grid must be strictly increasing with at least two nodes")
    h = (x[-1] - x[0]) / d.size
    if np.max(np.abs(d - h)) > 1e-9 * max(1.0, h):
        raise DomainError("grid must be log-uniform")
    return float(h)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Samples of a radial profile on a positive grid.

    ``tail`` describes the decay beyond the last node, ``inner_radius`` the
    radius below which the function vanishes.  ``profile`` is an optional
    exact evaluator; when present it is used instead of interpolating the
    samples.  ``error_bound`` carries per-node absolute error estimates for
    computed quantities.
    """

    grid: np.ndarray
    values: np.ndarray
    tail: EnvelopeClass | None = None
    inner_radius: float = 0.0
    profile: Callable | None = field(default=None, repr=False)
    error_bound: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise DomainError("grid and values must be 1-D arrays of equal length >= 2")
        if np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise DomainError("grid must be strictly increasing and positive")
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        if self.inner_radius < 0 or self.inner_radius > g[0] * (1 + 1e-12):
            raise DomainError("inner radius must lie in [0, first grid node]")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        live = r >= self.inner_radius * (1 - 1e-14)
        if self.profile is not None:
            if np.any(live):
                out[live] = self.profile(r[live])
            return out
        g, v = self.grid, self.values
        inside = live & (r >= g[0]) & (r <= g[-1])
        if np.any(inside):
            out[inside] = _interp(np.log(r[inside]), np.log(g), v)
        beyond = r > g[-1]
        if np.any(beyond) and self.tail is not None and not self.tail.compact:
            rb = r[beyond]
            out[beyond] = v[-1] * np.exp(self.tail.log_shape(rb) - self.tail.log_shape(g[-1]))
        below = live & (r < g[0])
        if np.any(below):
            out[below] = _head_extrapolate(r[below], g, v)
        return out

    def log_slope_tail(self, decades: float = 2.0) -> float:
        """Least-squares log-log slope of the samples over the last ``decades``."""
        g, v = self.grid, self.values
        sel = (g >= g[-1] * 10**-decades) & (v > 0)
        if sel.sum() < 2:
            return float("nan")
        return float(-np.polyfit(np.log(g[sel]), np.log(v[sel]), 1)[0])

    def to_csv(self, path) -> None:
        """Write ``r,value`` rows with 17 significant digits and an envelope sidecar."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "value"])
            for r, v in zip(self.grid, self.values):
                w.writerow([f"{r:.16e}", f"{v:.16e}"])
        meta = {
            "schema": "1",
            "tail": None if self.tail is None else self.tail.to_dict(),
            "inner_radius": self.inner_radius,
        }
        sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path) -> "RadialFunction":
        path = Path(path)
        with path.open() as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["r", "value"]:
            raise DomainError(f"{path}: expected header 'r,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        tail, inner = None, 0.0
        side = sidecar(path)
        if side.exists():
            meta = json.loads(side.read_text())
            tail = None if meta.get("tail") is None else EnvelopeClass.from_dict(meta["tail"])
            inner = float(meta.get("inner_radius", 0.0))
        return cls(data[:, 0], data[:, 1], tail=tail, inner_radius=inner)


def sidecar(path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".json")


def _interp(x, xg, v):
    """Piecewise power-law interpolation, linear where a sample vanishes."""
    j = np.clip(np.searchsorted(xg, x, side="right") - 1, 0, xg.size - 2)
    x0, x1 = xg[j], xg[j + 1]
    v0, v1 = v[j], v[j + 1]
    t = (x - x0) / (x1 - x0)
    lin = v0 + t * (v1 - v0)
    pos = (v0 > 0) & (v1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        pw = v0 * np.exp(t * np.log(np.where(pos, v1 / np.where(pos, v0, 1.0), 1.0)))
    return np.where(pos, pw, lin)


def _head_extrapolate(r, g, v):
    if v[0] > 0 and v[1] > 0:
        slope = math.log(v[1] / v[0]) / math.log(g[1] / g[0])
        return v[0] * (r / g[0]) ** slope
    return np.full_like(r, v[0])


# ---------------------------------------------------------------------------
# convolution


def _spherical_mean(N: int, a: float, d):
    """Mean of ``|e_1 - t theta|^(a - N)`` over unit ``theta`` with ``t = exp(-d)``, ``d >= 0``."""
    d = np.asarray(d, dtype=float)
    if N == 1:
        d = np.maximum(d, 1e-300)
        t = np.exp(-d)
        return 0.5 * ((1 + t) ** (a - 1) + (-np.expm1(-d)) ** (a - 1))
    if N == 3 and a == 2.0:
        return np.ones_like(d)
    A, B, C = (N - a) / 2, 1 - a / 2, N / 2
    out = np.empty_like(d)
    near = d < 0.25
    if abs(a - round(a)) > 0.05:
        # connection formula around z = 1 keeps full accuracy as s -> r
        w = -np.expm1(-2 * d[near])
        g = special.gamma
        t1 = g(C) * g(C - A - B) * special.rgamma(C - A) * special.rgamma(C - B)
        t2 = g(C) * g(A + B - C) * special.rgamma(A) * special.rgamma(B)
        out[near] = t1 * special.hyp2f1(A, B, A + B - C + 1, w) + t2 * w ** (C - A - B) * special.hyp2f1(
            C - A, C - B, C - A - B + 1, w
        )
    else:
        out[near] = special.hyp2f1(A, B, C, np.exp(-2 * np.maximum(d[near], 1e-12)))
    out[~near] = special.hyp2f1(A, B, C, np.exp(-2 * d[~near]))
    return out


def _kernel(N: int, a: float, y):
    """Log-variable kernel so that ``(I*f)(r) = A |S| r^a int K(y) f(r e^y) dy``."""
    y = np.asarray(y, dtype=float)
    growth = np.where(y < 0, N * y, a * y)
    return np.exp(growth) * _spherical_mean(N, a, np.abs(y))


@lru_cache(maxsize=64)
def _gauss(n: int):
    u, w = np.polynomial.legendre.leggauss(n)
    return (u + 1) / 2, w / 2


@lru_cache(maxsize=64)
def _regular_table(N: int, a: float, h: float, M: int, order: int):
    u, w = _gauss(order)
    k = np.arange(-M, M)[:, None]
    tab = w * h * _kernel(N, a, (k + u) * h)
    tab[M - 1] = 0.0  # interval left of the node: handled by the graded rule
    tab[M] = 0.0  # interval right of the node
    tab.setflags(write=False)
    return tab


def _grading(a: float) -> int:
    return max(2, math.ceil(4.0 / a))


@lru_cache(maxsize=64)
def _graded_rule(N: int, a: float, h: float, order: int):
    v, w = _gauss(2 * order)
    m = _grading(a)
    y = h * v**m
    wy = h * m * v ** (m - 1) * w
    right = wy * _kernel(N, a, y)
    left = wy * _kernel(N, a, -y)
    return y, right, left


def _conv_sum(fe, xe, h, out_idx, N, a, order):
    """Composite quadrature of ``int K(y) f(r e^y) dy`` on the extended log grid."""
    M = xe.size - 1
    u, _ = _gauss(order)
    freg = fe(np.exp(xe[:-1, None] + h * u[None, :]))
    tab = _regular_table(N, a, round(h, 15), M, order)
    acc = np.zeros(out_idx.size)
    rows = M - out_idx
    for gi in range(order):
        win = sliding_window_view(tab[:, gi], M)
        acc += win[rows] @ freg[:, gi]
    y, wr, wl = _graded_rule(N, a, round(h, 15), order)
    xc = xe[out_idx][:, None]
    fr = fe(np.exp(xc + y[None, :]))
    fl = fe(np.exp(xc - y[None, :]))
    has_right = (out_idx < M)[:, None]
    has_left = (out_idx > 0)[:, None]
    acc += np.sum(np.where(has_right, fr * wr, 0.0), axis=1)
    acc += np.sum(np.where(has_left, fl * wl, 0.0), axis=1)
    return acc


def radial_convolution(
    f: RadialFunction,
    params: RieszParams,
    *,
    order: int = 8,
    rtol: float = 1e-8,
    tail_decades: float = 4.0,
    head_decades: float = 4.0,
) -> RadialFunction:
    """Evaluate ``I_alpha * f`` on the grid of ``f``.

    The grid must be log-uniform.  The integral is split at every grid node;
    regular intervals use Gauss-Legendre rules, the two intervals touching the
    evaluation radius use a graded rule that absorbs the kernel singularity.
    The grid is extended by ``tail_decades`` using the declared envelope and by
    ``head_decades`` towards the origin when ``inner_radius`` is zero; what
    lies beyond is added in closed form.  ``error_bound`` of the result
    combines the quadrature estimate with the truncation bounds.
    """
    N, a = params.dim, params.alpha
    if np.any(f.values < 0):
        raise DomainError("convolution input must be nonnegative")
    h = log_step(f.grid)
    x = np.log(f.grid)
    n = x.size
    tail = f.tail
    if tail is not None and not _tail_integrable(tail, a):
        raise TailDivergence(
            f"tail {tail.kind}(exponent={tail.exponent}) is not integrable against the kernel (alpha={a})"
        )

    head = 0
    head_closed_form = False
    if f.inner_radius < f.grid[0] * (1 - 1e-12) and (f.values[0] > 0 or f.profile is not None):
        if f.inner_radius > 0:
            head = math.ceil((x[0] - math.log(f.inner_radius)) / h - 1e-9)
        else:
            head = math.ceil(head_decades * LN10 / h)
            head_closed_form = True
    extend_tail = tail is not None and not tail.compact
    ntail = math.ceil(tail_decades * LN10 / h) if extend_tail else 0
    xe = x[0] + h * np.arange(-head, n + ntail)
    s_lo, s_hi = math.exp(xe[0]), math.exp(xe[-1])

    def fe(s):
        val = f(s)
        return np.where((s >= s_lo * (1 - 1e-13)) & (s <= s_hi * (1 + 1e-13)), val, 0.0)

    out_idx = np.arange(head, head + n)
    pref = normalization_constant(params) * sphere_area(N) * f.grid**a

    best = err = None
    for lo_order, hi_order in ((order, order + 4), (order + 4, order + 8), (order + 8, order + 16)):
        lo = _conv_sum(fe, xe, h, out_idx, N, a, lo_order)
        hi = _conv_sum(fe, xe, h, out_idx, N, a, hi_order)
        best, err = hi, np.abs(hi - lo)
        scale = np.maximum(np.abs(hi), 1e-300)
        if np.all(err <= rtol * scale):
            break
    else:
        worst = float(np.max(err / np.maximum(np.abs(best), 1e-300)))
        raise QuadratureFailure(f"convolution quadrature estimate {worst:.2e} exceeds rtol={rtol:.0e}")

    value = pref * best
    bound = pref * err
    A_S = normalization_constant(params) * sphere_area(N)

    if extend_tail:
        far = _far_tail(f, a, s_hi)
        dev = np.abs(_spherical_mean(N, a, xe[-1] - x) - 1.0)
        value = value + A_S * far
        bound = bound + 2 * A_S * far * dev
    elif tail is None:
        est = _dropped_tail_estimate(f, a)
        bound = bound + A_S * est
        if est > 0:
            warnings.warn("no tail envelope declared: the tail beyond the grid was dropped", stacklevel=2)

    if head_closed_form:
        s0 = s_lo
        f0 = float(f(np.array([s0]))[0])
        if f0 > 0:
            f1 = float(f(np.array([s0 * math.exp(h)]))[0])
            slope = math.log(f1 / f0) / h if f1 > 0 else 0.0
            if N + slope <= 0:
                raise TailDivergence("input is not integrable at the origin")
            mass = f0 * s0**N / (N + slope)
            near = A_S * f.grid ** (a - N) * mass
            dev = np.abs(_spherical_mean(N, a, x - xe[0]) - 1.0)
            value = value + near
            bound = bound + 2 * near * dev

    out_tail = None if tail is None else asymptotic_envelope(tail, params)
    return RadialFunction(f.grid, value, tail=out_tail, inner_radius=0.0, error_bound=bound)


def _far_tail(f: RadialFunction, a: float, s_hi: float) -> float:
    """``int_{s_hi}^inf s^(a-1) f(s) ds`` with ``f`` continued by its envelope."""
    x0 = math.log(s_hi)

    def g(x):
        return math.exp(a * x) * float(f(np.array([math.exp(x)]))[0])

    total, pieces = 0.0, 0
    lo = x0
    while pieces < 200:
        part, _ = integrate.quad(g, lo, lo + 5.0, epsabs=0.0, epsrel=1e-11, limit=200)
        total += part
        pieces += 1
        lo += 5.0
        if abs(part) <= 1e-14 * abs(total) or total == 0.0:
            break
    else:
        raise QuadratureFailure("far tail integral did not settle")
    return total


def _dropped_tail_estimate(f: RadialFunction, a: float) -> float:
    g, v = f.grid, f.values
    if v[-1] <= 0:
        return 0.0
    if v[-2] <= 0:
        return math.inf
    e = -math.log(v[-1] / v[-2]) / math.log(g[-1] / g[-2])
    if e <= a:
        return math.inf
    return v[-1] * g[-1] ** a / (e - a)


def radial_integral(f, lo: float, hi: float, dim: int, *, breaks=(), order: int = 24,
                    pieces_per_decade: int = 16) -> float:
    """``|S^(N-1)| int_lo^hi f(r) r^(N-1) dr`` for a radial callable ``f``.

    ``breaks`` lists radii where ``f`` is not smooth; they become panel edges.
    """
    if hi <= lo:
        return 0.0
    cuts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    parts = []
    for c0, c1 in zip(cuts[:-1], cuts[1:]):
        n = max(1, math.ceil(math.log10(c1 / c0) * pieces_per_decade))
        parts.append(np.geomspace(c0, c1, n + 1)[:-1])
    edges = np.append(np.concatenate(parts), hi)
    u, w = _gauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    r = a + (b - a) * u[None, :]
    vals = np.asarray(f(r.ravel()), dtype=float).reshape(r.shape)
    return float(sphere_area(dim) * np.sum((b - a) * w * vals * r ** (dim - 1)))
