"""Quadratic-form inequalities evaluated on radial test functions.

Test functions are either smooth annular bumps (``TestFunction``) or sharp
truncated powers (``TruncatedPower``).  All integrals are radial, with the
surface measure of the unit sphere folded in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError
from .regimes import PotentialSpec, ProblemParams
from .riesz import (
    EnvelopeClass,
    RadialFunction,
    RieszParams,
    normalization_constant,
    radial_convolution,
    radial_integral,
    sphere_area,
)

SCHEMA = "1"


# ---------------------------------------------------------------------------
# smoothsteps: value and derivative on [0, 1], constant outside


def _step(t, smoothness: str):
    t = np.clip(t, 0.0, 1.0)
    if smoothness == "quintic":
        return t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    return t * t * (3.0 - 2.0 * t)


def _dstep(t, smoothness: str):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    if smoothness == "quintic":
        d = 30.0 * t * t * (1.0 - t) ** 2
    else:
        d = 6.0 * t * (1.0 - t)
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Radial bump rising on ``[a, 2a]``, equal to 1 on ``[2a, b]``, falling on ``[b, 2b]``.

    ``smoothness`` is ``"quintic"`` (C^2) or ``"cubic"`` (C^1).  A nonzero
    ``weight`` multiplies the bump by ``(r / 2a)^weight``, which keeps the
    value at the inner plateau edge but tilts the plateau.  The plateau value
    is ``amplitude``.
    """

    __test__ = False  # not a pytest class

    dim: int
    a: float = 0.5
    b: float = 2.0
    smoothness: str = "quintic"
    weight: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim}")
        if not (0 < self.a and 2 * self.a <= self.b and math.isfinite(self.b)):
            raise DomainError(f"bump needs 0 < 2a <= b < inf, got a={self.a}, b={self.b}")
        if self.smoothness not in ("quintic", "cubic"):
            raise DomainError(f"smoothness must be 'quintic' or 'cubic', got {self.smoothness!r}")
        if not math.isfinite(self.weight):
            raise DomainError("weight must be finite")
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise DomainError("amplitude must be finite and nonnegative")

    @classmethod
    def calibration(cls, dim: int) -> "TestFunction":
        """Bump supported in ``B_4 minus B_1/2`` with plateau on ``[1, 2]``."""
        return cls(dim, 0.5, 2.0)

    @property
    def support(self) -> tuple[float, float]:
        return self.a, 2 * self.b

    @property
    def breaks(self) -> tuple[float, ...]:
        return self.a, 2 * self.a, self.b, 2 * self.b

    def scaled(self, R: float) -> "TestFunction":
        """``x -> phi(x / R)``."""
        if not R > 0:
            raise DomainError("scale must be positive")
        return replace(self, a=self.a * R, b=self.b * R)

    def _parts(self, r):
        a, b, s = self.a, self.b, self.smoothness
        up = (r - a) / a
        down = (2 * b - r) / b
        c = self.amplitude
        shape = c * _step(up, s) * _step(down, s)
        dshape = c * (_dstep(up, s) * _step(down, s) / a - _step(up, s) * _dstep(down, s) / b)
        return shape, dshape

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        shape, _ = self._parts(r)
        if self.weight:
            shape = shape * (r / (2 * self.a)) ** self.weight
        return shape

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        shape, dshape = self._parts(r)
        if not self.weight:
            return dshape
        w = (r / (2 * self.a)) ** self.weight
        return w * (dshape + self.weight * shape / r)

    def to_dict(self) -> dict:
        return {"kind": "bump", "N": self.dim, "a": self.a, "b": self.b,
                "smoothness": self.smoothness, "weight": self.weight, "amplitude": self.amplitude}


@dataclass(frozen=True)
class TruncatedPower:
    """``r^exponent`` on ``[a, b]`` and zero elsewhere.  Not weakly differentiable."""

    dim: int
    exponent: float
    a: float = 1.0
    b: float = 1e3

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim}")
        if not (0 < self.a < self.b and math.isfinite(self.b)):
            raise DomainError(f"need 0 < a < b < inf, got a={self.a}, b={self.b}")
        if not math.isfinite(self.exponent):
            raise DomainError("exponent must be finite")

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    @property
    def breaks(self) -> tuple[float, ...]:
        return self.a, self.b

    def scaled(self, R: float) -> "TruncatedPower":
        if not R > 0:
            raise DomainError("scale must be positive")
        return replace(self, a=self.a * R, b=self.b * R)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.a) & (r <= self.b)
        return np.where(inside, np.abs(r) ** self.exponent, 0.0)

    def derivative(self, r):
        raise DomainError("a truncated power has no square-integrable gradient")

    def to_dict(self) -> dict:
        return {"kind": "truncated_power", "N": self.dim, "exponent": self.exponent,
                "a": self.a, "b": self.b}


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class FormReport:
    """Two sides of an inequality ``lhs >= rhs`` (or ``lhs <= C rhs``) and ``gap = lhs - rhs``."""

    kind: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.lhs) and math.isfinite(self.rhs)):
            raise DomainError(f"{self.kind}: both sides must be finite, got {self.lhs}, {self.rhs}")

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "kind": self.kind, "lhs": self.lhs, "rhs": self.rhs,
                "gap": self.gap, "params": self.params, **self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# energies


def _integrate(phi, f, lo=None, hi=None) -> float:
    s0, s1 = phi.support
    return radial_integral(f, lo or s0, hi or s1, phi.dim, breaks=phi.breaks)


def dirichlet_energy(phi, potential: PotentialSpec | None = None) -> float:
    """``int |grad phi|^2 + V phi^2`` over R^N."""
    potential = potential or PotentialSpec.zero()
    N = phi.dim

    def f(r):
        d = phi.derivative(r)
        return d * d + potential.value(r, N) * phi(r) ** 2

    return _integrate(phi, f)


def gradient_energy(phi) -> float:
    return dirichlet_energy(phi)


def weighted_mass(phi, exponent: float) -> float:
    """``int |x|^exponent phi^2``."""
    return _integrate(phi, lambda r: r**exponent * phi(r) ** 2)


def _sample(phi, nodes_per_decade: float) -> RadialFunction:
    lo, hi = phi.support
    n = max(8, math.ceil(math.log10(hi / lo) * nodes_per_decade))
    n += n % 2  # even number of intervals for Simpson
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), n + 1))
    grid[0], grid[-1] = lo, hi
    return RadialFunction(grid, phi(grid), tail=EnvelopeClass.compact_support(),
                          inner_radius=lo, profile=phi)


def riesz_energy(phi, params: RieszParams, *, nodes_per_decade: float = 256,
                 rtol: float = 1e-8) -> float:
    """``int int phi(x) I_alpha(x - y) phi(y) dx dy``.

    The potential ``I_alpha * phi`` is computed on a log-uniform grid spanning
    the support; the outer integral is Simpson's rule in ``log r``.  Because
    the grid follows the support, rescaling ``phi`` rescales every node and
    the discrete energy obeys the exact scaling law.
    """
    if phi.dim != params.dim:
        raise DomainError(f"test function lives in dimension {phi.dim}, kernel in {params.dim}")
    f = _sample(phi, nodes_per_decade)
    if not np.any(f.values):
        return 0.0
    conv = radial_convolution(f, params, rtol=rtol)
    t = np.log(f.grid)
    g = conv.values * f.values * f.grid**params.dim
    return float(sphere_area(params.dim) * simpson(g, x=t))


def rayleigh_quotient(phi, params: RieszParams, **kw) -> float:
    """``riesz_energy(phi) / int |x|^alpha phi^2``; bounded above by the Stein-Weiss constant."""
    mass = weighted_mass(phi, params.alpha)
    if mass <= 0:
        raise DomainError("test function vanishes identically")
    return riesz_energy(phi, params, **kw) / mass


def best_truncated_power(params: RieszParams, *, a: float = 1.0, decades=(3, 6, 12, 18, 24),
                         shifts=(-0.05, 0.0, 0.05), nodes_per_decade: float = 32):
    """Search truncated powers ``r^-(N+alpha)/2 + shift`` on ``[a, a 10^k]``.

    Returns ``(ratio, TruncatedPower)`` for the largest Rayleigh quotient found.
    The deficit from the Stein-Weiss constant shrinks only like
    ``1 / log(b / a)``, hence the very wide default ranges.
    """
    centre = -(params.dim + params.alpha) / 2
    best = None
    for k in decades:
        for s in shifts:
            phi = TruncatedPower(params.dim, centre + s, a, a * 10.0**k)
            val = rayleigh_quotient(phi, params, nodes_per_decade=nodes_per_decade)
            if best is None or val > best[0]:
                best = (val, phi)
    return best


# ---------------------------------------------------------------------------
# inequalities


def positivity_gap(phi, params: ProblemParams, **kw) -> FormReport:
    """``int |grad phi|^2 + V phi^2`` against ``int int phi I_alpha phi`` for the homogeneous equation.

    A negative gap rules out positive supersolutions of the equation with
    ``p + q = 1`` on any exterior domain containing the support of ``phi``.
    """
    if abs(params.p + params.q - 1) > 1e-12:
        raise DomainError(f"positivity gap needs p + q = 1, got p + q = {params.p + params.q}")
    if phi.dim != params.dim:
        raise DomainError("test function and problem live in different dimensions")
    if phi.support[0] < params.rho * (1 - 1e-12):
        raise DomainError(f"test function support starts at {phi.support[0]} inside rho={params.rho}")
    lhs = dirichlet_energy(phi, params.potential)
    rhs = riesz_energy(phi, params.riesz, **kw)
    return FormReport("positivity_gap", lhs, rhs, params=params.to_dict(),
                      extra={"test_function": phi.to_dict()})


def annulus_reference(params: ProblemParams, *, base: float = 4.0) -> tuple[float, float]:
    """``(C, e)`` of the reference bound ``C R^e``.

    ``C = base^(N - alpha) / A_alpha * K`` where ``K`` is the energy of the
    calibration bump: gradient plus the potential term scaled to the same
    power of ``R``, which is an upper bound for every ``R >= 1``.
    """
    N, a = params.dim, params.alpha
    V = params.potential
    phi = TestFunction.calibration(N)
    K = dirichlet_energy(phi)
    e = 2 * N - a - 2
    if V.variant == "hardy":
        K = dirichlet_energy(phi, V)
    elif V.variant == "fast":
        K += V.lam * weighted_mass(phi, -V.gamma)
    elif V.variant == "slow":
        K += V.lam**2 * weighted_mass(phi, -V.gamma)
        e = 2 * N - a - V.gamma
    C = base ** (N - a) / normalization_constant(params.riesz) * K
    return C, e


def _u_integral(u: RadialFunction, power: float, lo: float, hi: float, dim: int) -> float:
    breaks = () if u.profile is not None else tuple(u.grid[(u.grid > lo) & (u.grid < hi)])
    return radial_integral(lambda r: u(r) ** power, lo, hi, dim, breaks=breaks)


def annulus_bound_check(u: RadialFunction, params: ProblemParams, R: float, *,
                        base: float = 4.0) -> FormReport:
    """Compare ``(int_{rho<|x|<2R} u^p)(int_{R<|x|<2R} u^(q-1))`` with ``C R^e``.

    ``lhs`` is the reference ``C R^e``; ``rhs`` is the mass product, so a
    negative gap flags a violation of the bound.
    """
    rho, N = params.rho, params.dim
    if not R >= rho:
        raise DomainError(f"annulus radius R={R} must be at least rho={rho}")
    probe = np.geomspace(rho, 2 * R, 257)
    if np.any(u(probe) <= 0):
        raise DomainError("u must be positive on the annuli")
    mass_p = _u_integral(u, params.p, rho, 2 * R, N)
    mass_q = _u_integral(u, params.q - 1, R, 2 * R, N)
    C, e = annulus_reference(params, base=base)
    product = mass_p * mass_q
    return FormReport("annulus", C * R**e, product, params=params.to_dict(),
                      extra={"R": R, "constant": C, "exponent": e, "ratio": product / R**e})


def phragmen_lindelof_check(u: RadialFunction, f: RadialFunction | None, nu: float, r: float,
                            R: float, dim: int) -> tuple[FormReport, FormReport]:
    """Both weighted annulus inequalities for ``-Delta u + Hardy u >= f``.

    For each sign ``s`` the weights are ``|x|^(-(N-2)/2 - s nu)``.  The first
    report bounds the outer annulus plus source term by the inner annulus, the
    second the reverse; ``extra["implied_constant"]`` is ``lhs / rhs``.
    """
    if not (nu > 0 and r > 0 and R > 2 * r):
        raise DomainError(f"need nu > 0, r > 0 and R > 2r, got nu={nu}, r={r}, R={R}")
    N = dim
    k = (N + 2) / 2
    inner = _u_integral(u, 1.0, r / 2, r, N)
    outer = _u_integral(u, 1.0, R, 2 * R, N)

    def source(shift):
        if f is None:
            return 0.0
        breaks = () if f.profile is not None else tuple(f.grid[(f.grid > r) & (f.grid < R)])
        return radial_integral(lambda s: f(s) * s ** (-(N - 2) / 2 + shift), r, R, N, breaks=breaks)

    common = {"N": N, "nu": nu, "r": r, "R": R}
    reports = []
    for sign, lhs, rhs in (
        ("minus", R ** (-k - nu) * outer + source(-nu), r ** (-k - nu) * inner),
        ("plus", r ** (-k + nu) * inner + source(nu), R ** (-k + nu) * outer),
    ):
        implied = lhs / rhs if rhs > 0 else None
        reports.append(FormReport("phragmen_lindelof", lhs, rhs, params={**common, "branch": sign},
                                  extra={"implied_constant": implied}))
    return reports[0], reports[1]
