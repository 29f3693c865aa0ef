"""Decaying solutions of ``-Delta H + (lam^2 r^-gamma - m r^-sigma) H = 0`` outside a ball.

The decaying branch is computed from the Riccati form of the radial ODE,
integrated towards the origin in ``t = log r`` where it is stable.  WKB-type
comparison functions ``Phi_tau`` bracket the solution.  The eikonal integral
``psi`` is available by quadrature, by its binomial series and, for
``sigma = 1``, through an incomplete Beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.interpolate import BPoly

from .errors import DomainError, StiffnessFailure
from .riesz import EnvelopeClass, RadialFunction, log_grid


@dataclass(frozen=True)
class LinearProblem:
    dim: int
    gamma: float
    lam: float
    m: float = 0.0
    sigma: float | None = None
    rho: float = 1.0
    beta_agmon: float | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError("dimension must be a positive integer")
        if not self.gamma < 2:
            raise DomainError(f"gamma must be < 2, got {self.gamma}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if self.m < 0:
            raise DomainError(f"m must be nonnegative, got {self.m}")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        sig = self.gamma + 1.0 if self.sigma is None else float(self.sigma)
        if not sig > self.gamma:
            raise DomainError(f"sigma must exceed gamma, got sigma={sig}, gamma={self.gamma}")
        object.__setattr__(self, "sigma", sig)
        kappa = 1 - self.gamma / 2
        beta = kappa / 2 if self.beta_agmon is None else float(self.beta_agmon)
        if not 0 < beta < kappa:
            raise DomainError(f"beta_agmon must lie in (0, {kappa}), got {beta}")
        object.__setattr__(self, "beta_agmon", beta)
        if self.W2(self.rho) < -1e-12 * self.lam**2:
            raise DomainError("W^2 = lam^2 - m s^(gamma - sigma) is negative at rho")

    @property
    def kappa(self) -> float:
        return 1 - self.gamma / 2

    @property
    def beta_is_default(self) -> bool:
        return self.beta_agmon == self.kappa / 2

    def W2(self, s):
        return self.lam**2 - self.m * np.asarray(s, dtype=float) ** (self.gamma - self.sigma)

    def W(self, s):
        return np.sqrt(np.maximum(self.W2(s), 0.0))

    def dW(self, s):
        s = np.asarray(s, dtype=float)
        w = self.W(s)
        with np.errstate(divide="ignore"):
            return self.m * (self.sigma - self.gamma) * s ** (self.gamma - self.sigma - 1) / (2 * w)

    def potential(self, r):
        """``W(r)^2 r^-gamma``."""
        r = np.asarray(r, dtype=float)
        return self.W2(r) * r**-self.gamma


# ---------------------------------------------------------------------------
# eikonal integral


def _root(problem: LinearProblem) -> float:
    """Radius where ``lam^2 s^-gamma = m s^-sigma``; 0 when m = 0."""
    if problem.m == 0:
        return 0.0
    return (problem.m / problem.lam**2) ** (1 / (problem.sigma - problem.gamma))


def psi_integral(problem: LinearProblem, rho0: float, r) -> float | np.ndarray:
    """``int_rho0^r sqrt(lam^2 s^-gamma - m s^-sigma) ds`` by adaptive quadrature (rtol 1e-10)."""
    if rho0 <= 0:
        raise DomainError("rho0 must be positive")
    if problem.W2(rho0) < -1e-12 * problem.lam**2:
        raise DomainError("integrand is negative at rho0")
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    order = np.argsort(r_arr)
    out = np.empty_like(r_arr)
    g, sig, lam2, m = problem.gamma, problem.sigma, problem.lam**2, problem.m

    def f(s):
        return math.sqrt(max(lam2 * s**-g - m * s**-sig, 0.0))

    # the integrand has a square-root zero at rho0 when rho0 is the root
    at_root = problem.m > 0 and abs(rho0 - _root(problem)) <= 1e-9 * rho0
    acc, lo = 0.0, rho0
    for i in order:
        hi = r_arr[i]
        if hi < rho0:
            raise DomainError("r must be >= rho0")
        edges = np.geomspace(lo, hi, max(2, int(math.ceil(math.log10(hi / lo) * 4)) + 1)) if hi > lo else [lo]
        for a, b in zip(edges[:-1], edges[1:]):
            if at_root and a == rho0:
                # remove the square-root endpoint: s = rho0 + v^2
                part, _ = integrate.quad(lambda v: 2 * v * f(rho0 + v * v), 0, math.sqrt(b - a), epsabs=0,
                                         epsrel=1e-12, limit=200)
            else:
                part, _ = integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)
            acc += part
        lo = hi
        out[i] = acc
    return out if np.ndim(r) else float(out[0])


def _binom_coeff(j: int) -> float:
    """Coefficient ``c_j`` in ``sqrt(1 - x) = 1 - sum c_j x^j``."""
    return special.comb(2 * j, j, exact=True) / ((2 * j - 1) * 4**j)


def psi_expansion(problem: LinearProblem, rho0: float, r, k: int):
    """Partial binomial series for ``psi(r) - psi(rho0)`` and the remainder class.

    Returns ``(value, flag)``.  ``flag`` is ``"log"`` when the ``k``-th term
    is the logarithmic one, ``"bounded"`` when the neglected terms sum to
    ``O(1)`` and ``"unbounded"`` when more terms are needed for that.
    """
    if k < 0 or int(k) != k:
        raise DomainError("k must be a nonnegative integer")
    kap, d, lam, m = problem.kappa, problem.sigma - problem.gamma, problem.lam, problem.m
    ratio = kap / d
    if k > math.ceil(ratio - 1e-12):
        raise DomainError(f"k must be <= ceil(kappa/(sigma-gamma)) = {math.ceil(ratio - 1e-12)}")
    log_case = k >= 1 and abs(k - ratio) <= 1e-12
    r = np.asarray(r, dtype=float)

    def S(x):
        tot = x**kap / kap
        for j in range(1, k + 1):
            c = _binom_coeff(j) * m**j / lam ** (2 * j)
            if log_case and j == k:
                tot = tot - c * np.log(x)
            else:
                e = kap - j * d
                tot = tot - c * x**e / e
        return lam * tot

    value = S(r) - S(rho0)
    if log_case:
        flag = "log"
    elif (k + 1) * d > kap:
        flag = "bounded"
    else:
        flag = "unbounded"
    return (value if value.ndim else float(value)), flag


def incomplete_beta_form(gamma: float, lam: float, m: float, x_norm: float) -> float:
    """``psi`` for ``sigma = 1`` started at the turning point, as an incomplete Beta function.

    With ``c = m / lam^2`` the value is
    ``lam/(1-gamma) * c^((2-gamma)/(2(1-gamma))) * B_z(3/2, -(2-gamma)/(2(1-gamma)))``
    where ``z = 1 - c / x^(1-gamma)``.  The second Beta argument is negative, so
    the defining integral is evaluated directly after ``t = 1 - exp(-w)``.
    """
    if not gamma < 1:
        raise DomainError("incomplete Beta form needs gamma < 1")
    if not (lam > 0 and m > 0):
        raise DomainError("lambda and m must be positive")
    c = m / lam**2
    if not x_norm ** (1 - gamma) > c:
        raise DomainError("|x|^(1-gamma) must exceed m/lambda^2")
    z = 1 - c / x_norm ** (1 - gamma)
    b = -(2 - gamma) / (2 * (1 - gamma))
    wmax = -math.log1p(-z)

    def integrand(w):
        return math.sqrt(-math.expm1(-w)) * math.exp(-w * b)

    edges = np.linspace(0, wmax, max(2, int(wmax / 2) + 2))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        part, _ = integrate.quad(integrand, lo, hi, epsabs=0, epsrel=1e-13, limit=200)
        total += part
    return lam / (1 - gamma) * c ** ((2 - gamma) / (2 * (1 - gamma))) * total


# ---------------------------------------------------------------------------
# comparison functions


def _agmon_integral(problem: LinearProblem, r):
    """``int_rho^r W(s) s^(-gamma/2) ds`` (the same integral as ``psi`` from ``rho``)."""
    return psi_integral(problem, problem.rho, r)


def phi_tau_log_derivative(problem: LinearProblem, tau: float, r):
    r = np.asarray(r, dtype=float)
    g, b, N = problem.gamma, problem.beta_agmon, problem.dim
    return -(N - 1 - g / 2) / (2 * r) - problem.W(r) * r ** (-g / 2) + tau * r ** (-1 - b)


def log_phi_tau(problem: LinearProblem, tau: float, r):
    """``log Phi_tau(r) = int_rho^r phi_tau``."""
    r = np.asarray(r, dtype=float)
    g, b, N, rho = problem.gamma, problem.beta_agmon, problem.dim, problem.rho
    val = -((N - 1 - g / 2) / 2) * np.log(r / rho) - _agmon_integral(problem, r)
    return val + tau * (rho**-b - r**-b) / b


def phi_tau(problem: LinearProblem, tau: float, grid=None) -> RadialFunction:
    """``Phi_tau`` sampled on ``grid`` (default: 64 nodes per decade on ``[rho, 1e3 rho]``)."""
    if grid is None:
        grid = log_grid(problem.rho, 1e3 * problem.rho)
    grid = np.asarray(grid, dtype=float)
    if grid[0] < problem.rho * (1 - 1e-12):
        raise DomainError("grid must start at or beyond rho")

    def prof(s):
        return np.exp(log_phi_tau(problem, tau, s))

    env = EnvelopeClass.exponential(
        problem.lam / problem.kappa, problem.kappa, (problem.dim - 1) / 2 - problem.gamma / 4
    )
    return RadialFunction(grid, prof(grid), tail=env, inner_radius=problem.rho, profile=prof)


def phi_tau_residual(problem: LinearProblem, tau: float, r):
    """``(-Delta Phi_tau + W^2 r^-gamma Phi_tau) / Phi_tau`` via the chain rule."""
    r = np.asarray(r, dtype=float)
    g, b, N = problem.gamma, problem.beta_agmon, problem.dim
    phi = phi_tau_log_derivative(problem, tau, r)
    dphi = (N - 1 - g / 2) / (2 * r**2) - problem.dW(r) * r ** (-g / 2) + (g / 2) * problem.W(r) * r ** (
        -g / 2 - 1
    ) - tau * (1 + b) * r ** (-2 - b)
    return -(dphi + (N - 1) / r * phi + phi**2) + problem.potential(r)


def omega_tau(problem: LinearProblem, tau: float, r):
    """Remainder with ``residual = (2 tau W + omega) / r^(1 + gamma/2 + beta)``."""
    r = np.asarray(r, dtype=float)
    g, b, N = problem.gamma, problem.beta_agmon, problem.dim
    return (
        problem.dW(r) * r ** (1 + b)
        + (N - 1 - g / 2) * (N - 3 + g / 2) / (4 * r ** (1 - g / 2 - b))
        + tau * (1 - g / 2 + b) / r ** (1 - g / 2)
        - tau**2 / r ** (1 - g / 2 + b)
    )


def certified_radius(problem: LinearProblem, tau: float, r_max: float, nodes_per_decade: int = 64) -> float:
    """Smallest grid radius beyond which ``|omega_tau| < 2 |tau| W`` up to ``r_max``.

    There the residual of ``Phi_tau`` has the sign of ``tau``.  ``W`` is
    increasing, so its infimum over ``[R, inf)`` is ``W(R)``.
    """
    if tau == 0:
        raise DomainError("tau must be nonzero")
    grid = log_grid(problem.rho, max(r_max, 10 * problem.rho), nodes_per_decade)
    ok = np.abs(omega_tau(problem, tau, grid)) < 2 * abs(tau) * problem.W(grid)
    if not ok[-1]:
        return math.inf
    bad = np.nonzero(~ok)[0]
    return float(grid[0] if bad.size == 0 else grid[min(bad[-1] + 1, grid.size - 1)])


# ---------------------------------------------------------------------------
# minimal solution


@dataclass(frozen=True, eq=False)
class MinimalSolution:
    profile: RadialFunction
    psi_ref: dict
    tau_bounds: tuple
    problem: LinearProblem
    log_values: np.ndarray
    r_star: float
    metadata: dict = field(default_factory=dict)
    _spline: object = field(default=None, repr=False)

    def log_h(self, r):
        return self._spline(np.log(np.asarray(r, dtype=float)))

    def dlog_h(self, r):
        """``H'/H`` at ``r``."""
        r = np.asarray(r, dtype=float)
        return self._spline.derivative()(np.log(r)) / r

    def normalized_ratio(self, r=None):
        """``H r^((N-1)/2 - gamma/4) exp(int_rho^r W s^(-gamma/2))``; tends to 1."""
        P = self.problem
        r = self.profile.grid if r is None else np.asarray(r, dtype=float)
        e = (P.dim - 1) / 2 - P.gamma / 4
        return np.exp(self.log_h(r) + e * np.log(r) + _agmon_integral(P, r))

    def sandwich(self, r=None):
        """``(Phi_lower, H, Phi_upper)`` with both comparison functions matched to H at ``r_star``."""
        P = self.problem
        r = self.profile.grid[self.profile.grid >= self.r_star] if r is None else np.asarray(r, dtype=float)
        lo_t, hi_t = self.tau_bounds
        lh = self.log_h(r)
        anchor = self.log_h(self.r_star)
        lo = log_phi_tau(P, lo_t, r) - log_phi_tau(P, lo_t, self.r_star) + anchor
        hi = log_phi_tau(P, hi_t, r) - log_phi_tau(P, hi_t, self.r_star) + anchor
        return r, lo, lh, hi


def minimal_solution(
    problem: LinearProblem,
    r_max: float,
    *,
    nodes_per_decade: int = 64,
    tau_bounds: tuple = (-1.0, 1.0),
    rtol: float = 1e-10,
) -> MinimalSolution:
    """Decaying solution on ``[rho, r_max]``, normalised to the Agmon asymptotics.

    The Riccati variable ``g = H'/H`` is integrated from ``2 r_max`` towards
    ``rho`` starting at ``phi_tau`` with the upper ``tau``.  ``log H`` and the
    eikonal integral are carried along.  The additive constant in ``log H``
    is fixed so that the median of the normalised ratio over the final decade
    equals 1.
    """
    P = problem
    if not r_max > P.rho:
        raise DomainError("r_max must exceed rho")
    if np.any(P.W2(np.array([P.rho, r_max])) <= 0):
        raise DomainError("W^2 must be positive on [rho, r_max]")
    N, g = P.dim, P.gamma
    t0, t1 = math.log(P.rho), math.log(2 * r_max)

    def rhs(t, y):
        r = math.exp(t)
        G = y[0]
        V = float(P.potential(r))
        return [-(N - 1) * G + r * (V - G * G), r * G]

    def jac(t, y):
        r = math.exp(t)
        return [[-(N - 1) - 2 * r * y[0], 0.0], [r, 0.0]]

    g_start = float(phi_tau_log_derivative(P, tau_bounds[1], 2 * r_max))
    try:
        sol = integrate.solve_ivp(
            rhs, (t1, t0), [g_start, 0.0], method="Radau", jac=jac, rtol=rtol, atol=1e-12, dense_output=True
        )
    except Exception as exc:  # pragma: no cover - solver internals
        raise StiffnessFailure(f"ODE solver failed: {exc}") from exc
    if not sol.success:
        raise StiffnessFailure(f"ODE solver could not hold tolerance: {sol.message}")

    grid = log_grid(P.rho, r_max, nodes_per_decade)
    tg = np.log(grid)
    Y = sol.sol(tg)
    G, L = Y[0], Y[1]
    e = (N - 1) / 2 - g / 4
    psi = _agmon_integral(P, grid)
    last = grid >= r_max / 10
    shift = float(np.median(L[last] + e * tg[last] + psi[last]))
    L = L - shift
    # quintic Hermite in log r: slope r G and curvature from the Riccati equation
    dG = -(N - 1) * G + grid * (P.potential(grid) - G * G)
    d1 = grid * G
    d2 = d1 + grid * dG
    spline = BPoly.from_derivatives(tg, np.column_stack([L, d1, d2]))
    r_star = max(
        certified_radius(P, tau_bounds[1], r_max, nodes_per_decade),
        certified_radius(P, tau_bounds[0], r_max, nodes_per_decade),
    )
    env = EnvelopeClass.exponential(P.lam / P.kappa, P.kappa, e)
    prof = RadialFunction(grid, np.exp(L), tail=env, inner_radius=P.rho)
    meta = {
        "beta_agmon": P.beta_agmon,
        "beta_agmon_default": P.beta_is_default,
        "note": "beta_agmon is a free construction parameter; the default is kappa/2",
        "r_integration_start": 2 * r_max,
        "rtol": rtol,
    }
    return MinimalSolution(
        profile=prof,
        psi_ref={"rho0": P.rho, "integrand": "W(s) s^(-gamma/2)"},
        tau_bounds=tuple(tau_bounds),
        problem=P,
        log_values=L,
        r_star=r_star,
        metadata=meta,
        _spline=spline,
    )
