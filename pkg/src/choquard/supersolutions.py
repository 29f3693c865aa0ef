"""Closed-form candidate supersolutions and certified residual checks.

Every candidate is stored as ``u = mu * v`` with a fixed positive reference
weight ``w``.  Residuals are reported as ``L[u] / (mu w)``, which has the sign
of ``L[u] = -Lap u + V u - (I_alpha * u^p) u^q`` and does not underflow for
exponentially small profiles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import agmon
from .errors import DomainError, NoAdmissibleMu, TailDivergence
from .regimes import ProblemParams
from .riesz import (
    EnvelopeClass,
    RadialFunction,
    _tail_integrable,
    asymptotic_envelope,
    log_grid,
    radial_convolution,
)

FAMILIES = (
    "GreenDecay",
    "LogCorrected",
    "PowerShift",
    "Sublinear",
    "HardySublinear",
    "SlowPoly",
    "SlowLog",
    "SlowHom",
    "ExpMinimal",
)
# degenerate harmonic candidate mu * r^0, used to exercise the plumbing
CONSTANT = "Constant"

LADDER = tuple(2.0**k for k in range(-20, 21))
PM_EPS = 1e-3


def _potential_power(P: ProblemParams):
    """``V = c r^-g`` as ``(c, g)``; ``None`` for the zero potential."""
    V = P.potential
    if V.variant == "zero":
        return None
    if V.variant == "slow":
        return V.lam**2, V.gamma
    if V.variant == "fast":
        return V.lam, V.gamma
    return V.nu**2 - ((P.dim - 2) / 2) ** 2, 2.0


@dataclass(frozen=True)
class CandidateSupersolution:
    family: str
    problem: ProblemParams
    mu: float = 1.0
    beta: float = 1.0
    nu: float | None = None
    m: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES and self.family != CONSTANT:
            raise DomainError(f"unknown family {self.family!r}")
        if not (self.mu > 0 or (self.family == CONSTANT and self.mu == 0)):
            raise DomainError(f"mu must be positive, got {self.mu}")
        if self.family == "GreenDecay" and not self.beta > 0:
            raise DomainError("beta must be positive")
        shape = _shape(self)
        object.__setattr__(self, "nu", shape.nu)
        object.__setattr__(self, "m", shape.m)

    @property
    def rho(self) -> float:
        return self.problem.rho

    @property
    def shape(self) -> "_Shape":
        return _shape(self)

    def with_mu(self, mu: float) -> "CandidateSupersolution":
        return replace(self, mu=float(mu))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mu": self.mu,
            "beta": self.beta if self.family == "GreenDecay" else None,
            "nu": self.nu,
            "m": self.m,
            "rho": self.rho,
            "problem": self.problem.to_dict(),
        }


# ---------------------------------------------------------------------------
# per family shapes


@dataclass(frozen=True, eq=False)
class _Shape:
    """Profile pieces for ``v`` relative to the weight ``w``.

    ``log_w``, ``v_w = v / w``, ``lap_w = -Lap v / w`` are callables of r.
    ``u_tail`` is the envelope of ``v``; ``lhs_terms`` lists
    ``(coefficient, envelope)`` pairs whose sum is ``-Lap v + V v`` at infinity.
    """

    log_w: object
    v_w: object
    lap_w: object
    u_tail: EnvelopeClass
    lhs_terms: tuple
    nu: float | None = None
    m: float | None = None
    log_v: object = None
    extra: dict = field(default_factory=dict)


def _power_shape(P: ProblemParams, a: float, phi, s_log: float = 0.0, lead=None) -> _Shape:
    """``v = r^-a phi(log(r / rho))`` with ``phi = (value, d1, d2)``."""
    N, rho = P.dim, P.rho
    b = N - 2 - 2 * a
    c = a * (N - 2 - a)

    def v_w(r):
        return phi(np.log(np.asarray(r, dtype=float) / rho))[0]

    def lap_w(r):
        r = np.asarray(r, dtype=float)
        f, d1, d2 = phi(np.log(r / rho))
        return (-d2 - b * d1 + c * f) / r**2

    terms = []
    if lead is not None:
        terms.append(lead)
    elif c != 0:
        terms.append((c, EnvelopeClass.power_log(a + 2, s_log)))
    Vp = _potential_power(P)
    if Vp is not None:
        terms.append((Vp[0], EnvelopeClass.power_log(a + Vp[1], s_log)))
    return _Shape(
        log_w=lambda r: -a * np.log(np.asarray(r, dtype=float)),
        v_w=v_w,
        lap_w=lap_w,
        u_tail=EnvelopeClass.power_log(a, s_log),
        lhs_terms=tuple(terms),
        extra={"a": a},
    )


def _const_phi(t):
    t = np.asarray(t, dtype=float)
    return np.ones_like(t), np.zeros_like(t), np.zeros_like(t)


def _s_shape(P: ProblemParams, nu: float, c: float, kappa: float = 0.0) -> _Shape:
    """``v = log(s)^kappa s^-c`` with ``s = r^2 + nu^2``; the weight is ``v`` itself."""
    N = P.dim
    Vp = _potential_power(P)

    def log_v(r):
        s = np.asarray(r, dtype=float) ** 2 + nu**2
        out = -c * np.log(s)
        if kappa:
            out = out + kappa * np.log(np.log(s))
        return out

    def lap_w(r):
        r = np.asarray(r, dtype=float)
        s = r**2 + nu**2
        g1 = -c / s
        g2 = c / s**2
        if kappa:
            L = np.log(s)
            g1 = g1 + kappa / (s * L)
            g2 = g2 - kappa / (s**2 * L) - kappa / (s**2 * L**2)
        return -2 * N * g1 - 4 * r**2 * (g2 + g1**2)

    e = 2 * c
    terms = []
    if e * (N - 2 - e) != 0:
        terms.append((e * (N - 2 - e), EnvelopeClass.power_log(e + 2, kappa)))
    if Vp is not None:
        terms.append((Vp[0], EnvelopeClass.power_log(e + Vp[1], kappa)))
    return _Shape(
        log_w=log_v,
        v_w=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        lap_w=lap_w,
        u_tail=EnvelopeClass.power_log(e, kappa),
        lhs_terms=tuple(terms),
        nu=nu,
        log_v=log_v,
    )


def _auto_nu(P: ProblemParams, c: float, kappa: float, nu_min: float) -> float:
    """Smallest ``nu = 2^(k/2) >= nu_min`` with ``-Lap v + V v >= V v / 2`` on ``[rho, 1e8 rho]``."""
    r = log_grid(P.rho, 1e8 * P.rho, 32)
    V = P.potential.value(r, P.dim)
    for k in range(0, 81):
        nu = 2.0 ** (k / 2)
        if nu < nu_min:
            continue
        sh = _s_shape(P, nu, c, kappa)
        if np.all(sh.lap_w(r) + V / 2 > 0):
            return nu
    raise DomainError("no nu on the ladder makes the linear part positive")


def _slow_exponent(P: ProblemParams) -> float:
    """Decay exponent of the polynomial slow-potential candidate."""
    N, a, p, q = P.dim, P.alpha, P.p, P.q
    g = P.potential.gamma
    if P.p + P.q < 1 and q <= 1 - (N - a - g) * p / N:
        return -(a + g) / (1 - q - p)
    return (N - a - g) / (1 - q)


@lru_cache(maxsize=32)
def _minimal(N, gamma, lam, m, sigma, rho, r_max):
    return agmon.minimal_solution(agmon.LinearProblem(N, gamma, lam, m, sigma, rho), r_max)


def _exp_shape(c: CandidateSupersolution, r_max: float) -> _Shape:
    P = c.problem
    N, a, q = P.dim, P.alpha, P.q
    lam, g, rho = P.potential.lam, P.potential.gamma, P.rho
    sigma = 2.0 if q > 1 else float(N - a)
    m = c.m if c.m is not None else 0.5 * lam**2 * rho ** (sigma - g)
    if not 0 < m < lam**2 * rho ** (sigma - g):
        raise DomainError("m must lie in (0, lam^2 rho^(sigma - gamma))")
    if sigma > g:
        lin = agmon.LinearProblem(N, g, lam, m, sigma, rho)
    else:
        # sigma == gamma: the two terms merge into one slow potential
        lin = agmon.LinearProblem(N, g, math.sqrt(lam**2 - m), 0.0, None, rho)
    S = _minimal(N, g, lin.lam, lin.m, lin.sigma, rho, float(r_max))
    kap = lin.kappa
    env = EnvelopeClass.exponential(lin.lam / kap, kap, (N - 1) / 2 - g / 4)
    r_end = float(S.profile.grid[-1])
    l_end = float(S.log_h(r_end))

    def log_v(r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        inner = r <= r_end
        out[inner] = S.log_h(r[inner])
        out[~inner] = l_end + env.log_shape(r[~inner]) - env.log_shape(r_end)
        return out

    def lap_w(r):
        # -Lap H / H from the ODE that H solves
        return -lin.potential(np.asarray(r, dtype=float))

    return _Shape(
        log_w=log_v,
        v_w=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        lap_w=lap_w,
        u_tail=env,
        lhs_terms=((m, env.times(EnvelopeClass.power(sigma))),),
        m=m,
        log_v=log_v,
        extra={"sigma": sigma, "solution": S, "linear": lin},
    )


def _shape(c: CandidateSupersolution, r_max: float | None = None) -> _Shape:
    P = c.problem
    N, a, p, q = P.dim, P.alpha, P.p, P.q
    fam = c.family
    pot = P.potential.variant
    if fam == CONSTANT:
        return _power_shape(P, 0.0, _const_phi)
    if fam in ("GreenDecay", "LogCorrected", "PowerShift", "Sublinear") and pot not in ("zero", "fast"):
        raise DomainError(f"{fam} is built for the unperturbed or fast decay equation")
    if fam == "HardySublinear" and pot != "hardy":
        raise DomainError("HardySublinear needs a Hardy potential")
    if fam in ("SlowPoly", "SlowLog", "SlowHom", "ExpMinimal") and pot != "slow":
        raise DomainError(f"{fam} needs a slow decay potential")
    if fam in ("GreenDecay", "LogCorrected", "PowerShift") and N < 3:
        raise DomainError(f"{fam} needs N >= 3")

    if fam == "GreenDecay":
        beta = c.beta

        def phi(t):
            L = 1 + t
            return 1 - L**-beta, beta * L ** (-beta - 1), -beta * (beta + 1) * L ** (-beta - 2)

        lead = (beta * (N - 2), EnvelopeClass.power_log(N, -beta - 1))
        return _power_shape(P, N - 2, phi, 0.0, lead)
    if fam == "LogCorrected":
        d = N - a - 2
        if not d > 0:
            raise DomainError("LogCorrected needs alpha < N - 2")
        k, c0 = (N - 2) / d, 1 / d

        def phi(t):
            L = c0 + t
            return L**k, k * L ** (k - 1), k * (k - 1) * L ** (k - 2)

        lead = (k * (N - 2), EnvelopeClass.power_log(N, k - 1))
        return _power_shape(P, N - 2, phi, k, lead)
    if fam == "PowerShift":
        m_user = 0.5 if c.m is None else c.m
        if not 0 < m_user < N - 2:
            raise DomainError(f"PowerShift needs m in (0, N - 2), got {m_user}")
        cap = N - 2 - N / p - PM_EPS
        m = min(m_user, cap) if cap > 0 else m_user
        if not 0 < m < N - 2:
            raise DomainError(f"PowerShift needs m in (0, N - 2), got {m}")
        sh = _power_shape(P, N - 2 - m, _const_phi)
        return replace(sh, m=m)
    if fam in ("Sublinear", "HardySublinear"):
        if not q < 1:
            raise DomainError(f"{fam} needs q < 1")
        return _power_shape(P, (N - a - 2) / (1 - q), _const_phi)
    if fam == "SlowHom":
        return _power_shape(P, (N + a) / (2 * p), _const_phi)
    if fam == "SlowPoly":
        if not q < 1:
            raise DomainError("SlowPoly needs q < 1")
        e = _slow_exponent(P)
        nu = c.nu if c.nu is not None else _auto_nu(P, e / 2, 0.0, 1.0)
        if not nu > 0:
            raise DomainError("nu must be positive")
        return _s_shape(P, nu, e / 2)
    if fam == "SlowLog":
        if not p + q < 1:
            raise DomainError("SlowLog needs p + q < 1")
        kap = 1 / (1 - q - p)
        nu = c.nu if c.nu is not None else _auto_nu(P, N / (2 * p), kap, 1.5)
        if not nu > 1:
            raise DomainError(f"SlowLog needs nu > 1, got {nu}")
        return _s_shape(P, nu, N / (2 * p), kap)
    # ExpMinimal
    if not q >= 1:
        raise DomainError("ExpMinimal needs q >= 1")
    return _exp_shape(c, r_max if r_max is not None else 1e4 * P.rho)


# ---------------------------------------------------------------------------
# evaluation


def _check_grid(c: CandidateSupersolution, grid) -> np.ndarray:
    g = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(g < c.rho * (1 - 1e-12)):
        raise DomainError(f"candidate is defined for r >= rho = {c.rho}")
    return g


def _grid_shape(c, g):
    return _shape(c, max(float(g[-1]), 10 * c.rho)) if c.family == "ExpMinimal" else _shape(c)


def _log_v(sh: _Shape):
    if sh.log_v is not None:
        return sh.log_v

    def f(r):
        with np.errstate(divide="ignore"):
            return sh.log_w(r) + np.log(sh.v_w(r))

    return f


def evaluate(c: CandidateSupersolution, grid) -> RadialFunction:
    """Sample ``u`` on ``grid`` (all nodes at or beyond ``rho``)."""
    g = _check_grid(c, grid)
    sh = _grid_shape(c, g)
    lv = _log_v(sh)
    mu = c.mu

    def prof(r):
        return mu * np.exp(lv(r))

    vals = prof(g) if g.size else g
    if g.size < 2:
        g2 = np.array([g[0], g[0] * 2]) if g.size else np.array([c.rho, 2 * c.rho])
        return RadialFunction(g2, prof(g2), tail=sh.u_tail, inner_radius=c.rho, profile=prof)
    return RadialFunction(g, vals, tail=sh.u_tail, inner_radius=min(c.rho, g[0]), profile=prof)


def radial_laplacian(c: CandidateSupersolution, grid) -> RadialFunction:
    """Analytic ``-Lap u`` of the radial profile."""
    g = _check_grid(c, grid)
    sh = _grid_shape(c, g)
    vals = c.mu * np.exp(sh.log_w(g)) * sh.lap_w(g)
    return RadialFunction(g, vals, inner_radius=min(c.rho, g[0]))


def finite_difference_laplacian(c: CandidateSupersolution, grid, h: float = 1e-2) -> np.ndarray:
    """``-Lap u`` by Richardson-extrapolated central differences in ``t = log r``."""
    g = _check_grid(c, grid)
    sh = _grid_shape(c, g)
    N = c.problem.dim
    t = np.log(g)

    def lap(hh):
        if sh.log_v is not None:
            # differentiate log u to keep exponential profiles representable
            f0, fp, fm = sh.log_v(g), sh.log_v(np.exp(t + hh)), sh.log_v(np.exp(t - hh))
            d1 = (fp - fm) / (2 * hh)
            d2 = (fp - 2 * f0 + fm) / hh**2
            return -(d2 + d1**2 + (N - 2) * d1) * np.exp(f0) / g**2
        # u = r^-a phi(t): difference phi and apply the conjugated operator
        a = sh.extra["a"]
        f0, fp, fm = sh.v_w(g), sh.v_w(np.exp(t + hh)), sh.v_w(np.exp(t - hh))
        d1 = (fp - fm) / (2 * hh)
        d2 = (fp - 2 * f0 + fm) / hh**2
        return (-d2 - (N - 2 - 2 * a) * d1 + a * (N - 2 - a) * f0) * g ** (-a - 2)

    coarse, fine = lap(h), lap(h / 2)
    return c.mu * (4 * fine - coarse) / 3


# ---------------------------------------------------------------------------
# residuals


@dataclass
class ResidualReport:
    """``L[u] / (mu w)`` on a grid together with its certified lower bound."""

    grid: np.ndarray
    residual: np.ndarray
    certified: np.ndarray
    min_residual: float
    first_violation_radius: float | None
    mu_used: float
    family: str = ""
    tail_ok: bool = True
    tail_note: str = ""

    def to_dict(self) -> dict:
        return {
            "schema": "1",
            "family": self.family,
            "mu_used": self.mu_used,
            "min_residual": self.min_residual,
            "first_violation_radius": self.first_violation_radius,
            "tail_ok": self.tail_ok,
            "tail_note": self.tail_note,
            "nodes": int(self.grid.size),
            "r_min": float(self.grid[0]),
            "r_max": float(self.grid[-1]),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self, path) -> None:
        with Path(path).open("w") as fh:
            fh.write("r,residual,certified\n")
            for r, v, c in zip(self.grid, self.residual, self.certified):
                fh.write(f"{r:.16e},{v:.16e},{c:.16e}\n")


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def _compare_decay(x: EnvelopeClass, y: EnvelopeClass) -> int:
    """-1 if ``x`` decays slower than ``y``, 1 if faster, 0 if the classes coincide."""
    for u, v in zip(x.order_key(), y.order_key()):
        if not _same(u, v):
            return -1 if u < v else 1
    return 0


def tail_check(c: CandidateSupersolution) -> tuple[bool, str]:
    """Sign of the residual at infinity, decided on envelopes.

    Raises TailDivergence when ``u^p`` is not integrable against the kernel.
    Returns ``(ok, note)``; equal envelopes leave the decision to the grid.
    """
    P = c.problem
    sh = _shape(c) if c.family != "ExpMinimal" else _shape(c, 10 * c.rho)
    up = sh.u_tail.raised(P.p)
    if not _tail_integrable(up, P.alpha):
        raise TailDivergence(f"u^p with envelope exponent {up.exponent} is not integrable against the kernel")
    rhs = asymptotic_envelope(up, P.riesz).times(sh.u_tail.raised(P.q))
    lead = None
    for coef, env in sh.lhs_terms:
        if coef == 0:
            continue
        if lead is None or _compare_decay(env, lead[1]) < 0:
            lead = (coef, env)
        elif _compare_decay(env, lead[1]) == 0:
            lead = (lead[0] + coef, env)
    if lead is None or lead[0] <= 0:
        return False, "the linear part is not positive at infinity"
    cmp = _compare_decay(rhs, lead[1])
    if cmp < 0:
        return False, "the nonlocal term decays slower than the linear part for every mu"
    if cmp == 0:
        return True, "equal decay classes at infinity; decided on the grid"
    return True, "the linear part dominates at infinity"


class _Pieces:
    """Amplitude-independent parts of the residual on a grid."""

    def __init__(self, c: CandidateSupersolution, params: ProblemParams, grid, rtol=1e-10):
        g = _check_grid(c, grid)
        if g.size < 2:
            raise DomainError("residual needs at least two grid nodes")
        sh = _grid_shape(c, g)
        self.grid = g
        P = params
        self.p, self.q = P.p, P.q
        lw = sh.log_w(g)
        vw = sh.v_w(g)
        self.lin = sh.lap_w(g) + P.potential.value(g, P.dim) * vw
        lv = _log_v(sh)

        def prof(r):
            return np.exp(P.p * lv(r))

        with np.errstate(divide="ignore"):
            fvals = prof(g)
        f = RadialFunction(g, fvals, tail=sh.u_tail.raised(P.p), inner_radius=min(c.rho, g[0]), profile=prof)
        conv = radial_convolution(f, P.riesz, rtol=rtol)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            fac = np.where(vw > 0, vw**P.q * np.exp((P.q - 1) * lw), 0.0 if P.q > 0 else np.exp(-lw))
        self.nonlin = conv.values * fac
        self.nonlin_err = (conv.error_bound if conv.error_bound is not None else 0.0) * fac

    def at(self, mu: float, family: str = ""):
        s = mu ** (self.p + self.q - 1)
        res = self.lin - s * self.nonlin
        cert = res - s * self.nonlin_err
        bad = np.nonzero(cert < 0)[0]
        return ResidualReport(
            grid=self.grid,
            residual=res,
            certified=cert,
            min_residual=float(np.min(cert)),
            first_violation_radius=float(self.grid[bad[0]]) if bad.size else None,
            mu_used=float(mu),
            family=family,
        )


def default_grid(c_or_rho, decades: float = 4.0, nodes_per_decade: int = 64) -> np.ndarray:
    rho = c_or_rho.rho if isinstance(c_or_rho, CandidateSupersolution) else float(c_or_rho)
    return log_grid(rho, rho * 10**decades, nodes_per_decade)


def residual(c: CandidateSupersolution, params: ProblemParams | None = None, grid=None, *,
             rtol: float = 1e-10) -> ResidualReport:
    """``L[u]`` on ``grid`` (default ``[rho, 1e4 rho]``), scaled by ``mu w``."""
    P = c.problem if params is None else params
    g = default_grid(c) if grid is None else grid
    if c.mu == 0:
        g = _check_grid(c, g)
        z = np.zeros_like(g)
        return ResidualReport(g, z, z, 0.0, None, 0.0, c.family)
    rep = _Pieces(c, P, g, rtol).at(c.mu, c.family)
    ok, note = tail_check(replace(c, problem=P))
    rep.tail_ok, rep.tail_note = ok, note
    return rep


def pick_mu(family: str, params: ProblemParams, grid=None, *, rtol: float = 1e-10, **kw) -> float:
    """First amplitude on the ladder ``2^-20 .. 2^20`` with a certified nonnegative residual.

    The walk starts at the favourable end: from ``2^-20`` upwards when
    ``p + q > 1``, from ``2^20`` downwards when ``p + q < 1``.  Homogeneous
    problems only try ``mu = 1``.  The residual must
    also be nonnegative at infinity, which is decided on envelopes.
    """
    c = CandidateSupersolution(family, params, **kw)
    g = default_grid(c) if grid is None else grid
    try:
        ok, note = tail_check(c)
    except TailDivergence as exc:
        raise NoAdmissibleMu(f"{family}: {exc}") from exc
    if not ok:
        raise NoAdmissibleMu(f"{family}: {note}")
    pieces = _Pieces(c, params, g, rtol)
    s = params.p + params.q
    if _same(s, 1.0):
        ladder = (1.0,)
    elif s > 1:
        ladder = LADDER
    else:
        ladder = LADDER[::-1]
    rep = None
    for mu in ladder:
        rep = pieces.at(mu, family)
        if rep.min_residual >= 0:
            return mu
    raise NoAdmissibleMu(f"{family}: no mu on the ladder gives a nonnegative certified residual", report=rep)


def verify(family: str, params: ProblemParams, grid=None, *, rtol: float = 1e-10, **kw) -> ResidualReport:
    """Run ``pick_mu`` and return the residual report of the chosen amplitude."""
    mu = pick_mu(family, params, grid, rtol=rtol, **kw)
    c = CandidateSupersolution(family, params, mu=mu, **kw)
    return residual(c, params, grid, rtol=rtol)
