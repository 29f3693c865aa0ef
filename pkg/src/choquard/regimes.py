"""Existence classes and sharp lower decay rates for exterior Choquard problems.

``classify`` maps a parameter tuple to a :class:`Verdict`.  The decision
procedure follows the potential class, then the position of ``q`` relative to
1, then the critical lines in the ``(p, q)`` plane.  Every inequality is
evaluated exactly as supplied; ``Verdict.boundary`` reports tuples that sit
within 1e-12 of a critical line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, NoDecayClaim
from .riesz import RieszParams, lambda_star

BOUNDARY_TOL = 1e-12
LAMBDA_ULPS = 4

EXISTS = "Exists"
NOT_EXISTS = "NotExists"
THRESHOLD = "ThresholdDependent"
OPEN = "Open"


# ---------------------------------------------------------------------------
# parameter types


@dataclass(frozen=True)
class PotentialSpec:
    """Potential ``V`` at infinity.

    ``zero``: V = 0.  ``fast``: V = lam |x|^-gamma with gamma > 2.
    ``hardy``: V = (nu^2 - ((N-2)/2)^2) |x|^-2.  ``slow``: V = lam^2 |x|^-gamma
    with gamma < 2 and lam > 0.
    """

    variant: str = "zero"
    lam: float = 0.0
    gamma: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        v = self.variant.lower()
        object.__setattr__(self, "variant", v)
        for name in ("lam", "gamma", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"potential parameter {name} must be finite")
        if v == "fast":
            if not self.gamma > 2:
                raise DomainError(f"fast potential requires gamma > 2, got {self.gamma}")
        elif v == "slow":
            if not self.gamma < 2:
                raise DomainError(f"slow potential requires gamma < 2, got {self.gamma}")
            if not self.lam > 0:
                raise DomainError(f"slow potential requires lambda > 0, got {self.lam}")
        elif v == "hardy":
            if not self.nu > 0:
                raise DomainError(f"Hardy potential requires nu > 0, got {self.nu}")
        elif v != "zero":
            raise DomainError(f"unknown potential variant {self.variant!r}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def fast(cls, lam: float, gamma: float):
        return cls("fast", lam=lam, gamma=gamma)

    @classmethod
    def hardy(cls, nu: float):
        return cls("hardy", nu=nu)

    @classmethod
    def slow(cls, lam: float, gamma: float):
        return cls("slow", lam=lam, gamma=gamma)

    def value(self, r, dim: int):
        """Pointwise ``V(r)``."""
        r = np.asarray(r, dtype=float)
        if self.variant == "zero":
            return np.zeros_like(r)
        if self.variant == "fast":
            return self.lam * r**-self.gamma
        if self.variant == "slow":
            return self.lam**2 * r**-self.gamma
        return (self.nu**2 - ((dim - 2) / 2) ** 2) * r**-2.0

    def to_dict(self) -> dict:
        d = {"variant": self.variant}
        if self.variant in ("fast", "slow"):
            d.update(lam=self.lam, gamma=self.gamma)
        if self.variant == "hardy":
            d["nu"] = self.nu
        return d


@dataclass(frozen=True)
class ProblemParams:
    dim: int
    alpha: float
    p: float
    q: float
    potential: PotentialSpec = field(default_factory=PotentialSpec.zero)
    rho: float = 1.0

    def __post_init__(self):
        RieszParams(self.dim, self.alpha)
        object.__setattr__(self, "dim", int(self.dim))
        if not (self.p > 0 and math.isfinite(self.p)):
            raise DomainError(f"p must be positive and finite, got {self.p}")
        if not math.isfinite(self.q):
            raise DomainError(f"q must be finite, got {self.q}")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")

    @property
    def riesz(self) -> RieszParams:
        return RieszParams(self.dim, self.alpha)

    def to_dict(self) -> dict:
        return {
            "N": self.dim,
            "alpha": self.alpha,
            "p": self.p,
            "q": self.q,
            "potential": self.potential.to_dict(),
            "rho": self.rho,
        }


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class DecayRate:
    """Lower bound on the decay of every nontrivial supersolution.

    ``Power``: liminf u r^e > 0.  ``PowerLog``: liminf u r^e (log r)^-ell > 0.
    ``PowerFamily``: liminf u r^(e - m) > 0 for some m > 0.
    ``ExpPsi``: liminf u r^prefactor exp(psi_m(r)) > 0 for some m, with
    psi_m the integral of sqrt(lam^2 s^-gamma - m s^-sigma).
    ``ExpPlain``: liminf u r^prefactor exp(rate r^power) > 0; when
    ``m_family`` is set the rate is 2 (lam - m)/(2 - gamma) for some m in (0, lam).
    """

    variant: str
    e: float = 0.0
    ell: float = 0.0
    prefactor_power: float = 0.0
    gamma: float = 0.0
    sigma: float = 0.0
    lam: float = 0.0
    rate: float = 0.0
    power: float = 0.0
    m_family: bool = False
    label: str = ""

    def __post_init__(self):
        for name in ("e", "ell", "prefactor_power", "gamma", "sigma", "lam", "rate", "power"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not math.isfinite(getattr(self, name)):
                raise DomainError("decay exponents must be finite")
        if self.variant == "ExpPsi" and not self.sigma > self.gamma:
            raise DomainError("ExpPsi requires sigma > gamma")

    def to_dict(self) -> dict:
        keys = {
            "Power": ("e",),
            "PowerLog": ("e", "ell"),
            "PowerFamily": ("e",),
            "ExpPsi": ("prefactor_power", "gamma", "sigma", "lam", "m_family"),
            "ExpPlain": ("prefactor_power", "rate", "power", "m_family"),
        }[self.variant]
        d = {"variant": self.variant, **{k: getattr(self, k) for k in keys}}
        if self.label:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DecayRate":
        return cls(**d)

    def log_weight(self, r):
        """``log`` of the weight w(r) such that u * w stays bounded below (for m -> 0)."""
        r = np.asarray(r, dtype=float)
        if self.variant in ("Power", "PowerFamily"):
            return self.e * np.log(r)
        if self.variant == "PowerLog":
            return self.e * np.log(r) - self.ell * np.log(np.log(r))
        if self.variant == "ExpPlain":
            return self.prefactor_power * np.log(r) + self.rate * r**self.power
        kappa = 1 - self.gamma / 2
        return self.prefactor_power * np.log(r) + self.lam * r**kappa / kappa


@dataclass(frozen=True)
class Verdict:
    existence: str
    decay: DecayRate | None = None
    citations: tuple = ()
    boundary: bool = False
    detail: str = ""

    def to_dict(self) -> dict:
        d = {
            "schema": "1",
            "existence": self.existence,
            "decay": None if self.decay is None else self.decay.to_dict(),
            "citations": list(self.citations),
            "boundary": self.boundary,
        }
        if self.detail:
            d["detail"] = self.detail
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        decay = None if d.get("decay") is None else DecayRate.from_dict(d["decay"])
        return cls(
            existence=d["existence"],
            decay=decay,
            citations=tuple(d.get("citations", ())),
            boundary=bool(d.get("boundary", False)),
            detail=d.get("detail", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "Verdict":
        return cls.from_dict(json.loads(text))

    @property
    def code(self) -> str:
        """Short region code: existence plus the decay label."""
        if self.existence == EXISTS and self.decay is not None:
            return f"{EXISTS}:{self.decay.label or self.decay.variant}"
        return self.existence


class _Redo(Exception):
    pass


class _Checks:
    """Comparator shared by one classification pass.

    Two values count as equal when their correctly rounded doubles coincide,
    so a float that is the nearest representable point of a critical line sits
    on that line.  The fast pass works in floats and asks for an exact rerun
    whenever a comparison is too close to call.
    """

    def __init__(self, exact: bool):
        self.exact = exact
        self.failed: list[str] = []
        self.near = False

    def num(self, *xs):
        if self.exact:
            return tuple(Fraction(x) for x in xs)
        return tuple(float(x) for x in xs)

    def cmp(self, lhs, rhs) -> int:
        if self.exact:
            if abs(lhs - rhs) <= BOUNDARY_TOL:
                self.near = True
            fl, fr = float(lhs), float(rhs)
            return (fl > fr) - (fl < fr)
        if abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs), abs(rhs)):
            raise _Redo
        return (lhs > rhs) - (lhs < rhs)

    def gt(self, name, lhs, rhs) -> bool:
        return self._record(name, self.cmp(lhs, rhs) > 0)

    def ge(self, name, lhs, rhs) -> bool:
        return self._record(name, self.cmp(lhs, rhs) >= 0)

    def _record(self, name, ok) -> bool:
        if not ok:
            self.failed.append(name)
        return ok


# ---------------------------------------------------------------------------
# classification


def classify(params: ProblemParams) -> Verdict:
    """Existence verdict and lower decay bound for ``params``."""
    kind = params.potential.variant
    rule = {"zero": _classify_green, "fast": _classify_green, "hardy": _classify_hardy}.get(kind, _classify_slow)
    try:
        return rule(params, _Checks(exact=False))
    except _Redo:
        return rule(params, _Checks(exact=True))


def decay_rate(params: ProblemParams) -> DecayRate:
    v = classify(params)
    if v.existence not in (EXISTS, THRESHOLD) or v.decay is None:
        raise NoDecayClaim(f"no lower decay bound is available ({v.existence})")
    return v.decay


def _classify_green(P: ProblemParams, c: _Checks) -> Verdict:
    N, a, p, q = c.num(P.dim, P.alpha, P.p, P.q)
    tag = "Thm-free" if P.potential.variant == "zero" else "Thm-fast"
    if P.dim <= 2:
        if P.potential.variant == "zero":
            return Verdict(NOT_EXISTS, citations=("Prop-dim12",))
        return Verdict(OPEN, detail="fast decay potentials are only treated for N >= 3")
    c.gt("A-1", p, a / (N - 2))
    c.gt("A-2", p + q, (N + a) / (N - 2))
    side = c.cmp(a, N - 2)
    if side > 0:
        c.gt("A-3", q, a / (N - 2))
    elif side == 0:
        c.ge("A-3plus", q, 1)
    else:
        c.gt("A-4", q, 1 - (N - a - 2) * p / N)
    if c.failed:
        return Verdict(NOT_EXISTS, citations=(tag, *c.failed), boundary=c.near)
    thr = a / (N - 2)
    pos = c.cmp(q, thr)
    if pos > 0:
        decay = DecayRate("Power", e=N - 2, label="B-1")
    elif pos == 0 and side == 0:
        decay = DecayRate("PowerFamily", e=N - 2, label="B-1plus")
    elif pos == 0:
        decay = DecayRate("PowerLog", e=N - 2, ell=(N - 2) / (N - a - 2), label="B-1plusplus")
    else:
        decay = DecayRate("Power", e=(N - a - 2) / (1 - q), label="B-2")
    return Verdict(EXISTS, decay=decay, citations=(tag,), boundary=c.near)


def _classify_hardy(P: ProblemParams, c: _Checks) -> Verdict:
    N, a, p, q, nu = c.num(P.dim, P.alpha, P.p, P.q, P.potential.nu)
    if P.dim < 2:
        return Verdict(OPEN, detail="Hardy potentials are only treated for N >= 2")
    k = (N - 2) / 2 + nu
    c.gt("A-1-Hardy", p, a / k)
    c.gt("A-2-Hardy", p + q, 1 + (a + 2) / k)
    side = c.cmp(a, N - 2)
    if side > 0:
        c.gt("A-3-Hardy", q, 1 + (a - (N - 2)) / k)
    elif side == 0:
        c.ge("A-3plus-Hardy", q, 1)
    else:
        c.gt("A-3+Hardy", q, 1 - (N - a - 2) * p / N)
        if c.cmp(nu, (N - 2) / 2) < 0:
            c.gt("A-4-Hardy", q, 1 - (N - a - 2) / ((N - 2) / 2 - nu))
    if c.failed:
        return Verdict(NOT_EXISTS, citations=("Thm-Hardy", *c.failed), boundary=c.near)
    pos = c.cmp(q, 1 + (a - (N - 2)) / k)
    if pos > 0:
        decay = DecayRate("Power", e=k, label="B-1-Hardy")
    elif pos == 0 and side == 0:
        decay = DecayRate("PowerFamily", e=k, label="B-1plus-Hardy")
    elif pos == 0:
        decay = DecayRate("PowerLog", e=k, ell=k / (N - a - 2), label="B-1plusplus-Hardy")
    else:
        decay = DecayRate("Power", e=(N - a - 2) / (1 - q), label="B-2-Hardy")
    return Verdict(EXISTS, decay=decay, citations=("Thm-Hardy",), boundary=c.near)


def _classify_slow(P: ProblemParams, c: _Checks) -> Verdict:
    N, a, p, q, g = c.num(P.dim, P.alpha, P.p, P.q, P.potential.gamma)
    lam = P.potential.lam
    pref = (N - 1) / 2 - g / 4
    extra = ("TheoremA",) if (P.dim, P.alpha, P.p, P.q) == (3, 2, 2, 1) else ()

    qpos = c.cmp(q, 1)
    if qpos > 0:
        decay = DecayRate("ExpPlain", prefactor_power=pref, rate=2 * lam / (2 - g), power=(2 - g) / 2,
                          label="exp-1+")
        return Verdict(EXISTS, decay=decay, citations=("Thm-exp",), boundary=c.near)

    if qpos == 0:
        if not c.ge("nonexist-exp+", N - a, g):
            return Verdict(NOT_EXISTS, citations=(*extra, "Thm-exp+"), boundary=c.near)
        if c.cmp(g, N - a) < 0:
            decay = DecayRate("ExpPsi", prefactor_power=pref, gamma=g, sigma=N - a, lam=lam, m_family=True,
                              label="exp-fund-Thm")
        else:
            decay = DecayRate("ExpPlain", prefactor_power=pref, rate=2 * lam / (2 - g), power=(2 - g) / 2,
                              m_family=True, label="exp-fund-Thm2")
        return Verdict(EXISTS, decay=decay, citations=(*extra, "Thm-exp+"), boundary=c.near)

    if c.cmp(p + q, 1) == 0:
        return _classify_homogeneous(P, c, N, a, q, g)

    if c.cmp(a, N - 2) > 0 and c.cmp(g, N - a) >= 0:
        return Verdict(NOT_EXISTS, citations=("Thm-slow",), boundary=c.near)

    line = 1 - (N - a - g) * p / N
    if c.cmp(g, -a) > 0:
        if not c.gt("non-slow-moderate", q, line):
            return Verdict(NOT_EXISTS, citations=("Thm-slow-moderate", "non-slow-moderate"), boundary=c.near)
        decay = DecayRate("Power", e=(N - a - g) / (1 - q), label="decay-slow-moderate")
        return Verdict(EXISTS, decay=decay, citations=("Thm-slow-moderate",), boundary=c.near)

    if not c.gt("non-slow-fast", q, 1 + g * p / a):
        return Verdict(NOT_EXISTS, citations=("Thm-slow-fast", "non-slow-fast"), boundary=c.near)
    pos = c.cmp(q, line)
    if pos > 0:
        decay = DecayRate("Power", e=(N - a - g) / (1 - q), label="C-1")
    elif pos == 0:
        decay = DecayRate("PowerLog", e=N / p, ell=1 / (1 - q - p), label="C-2")
    else:
        decay = DecayRate("Power", e=-(a + g) / (1 - q - p), label="C-3")
    return Verdict(EXISTS, decay=decay, citations=("Thm-slow-fast",), boundary=c.near)


def _classify_homogeneous(P: ProblemParams, c: _Checks, N, a, q, g) -> Verdict:
    """The line p + q = 1 with a slow potential."""
    lam = P.potential.lam
    multi = P.dim >= 2
    decay = DecayRate("Power", e=N / (1 - q), label="t-pq1")
    side = c.cmp(g, -a)
    if side > 0:
        return Verdict(NOT_EXISTS, citations=("t-pq1",) if multi else ("nonSlowDecayq",), boundary=c.near)
    if side < 0:
        return Verdict(
            THRESHOLD,
            decay=decay,
            citations=("t-pq1",) if multi else ("slow-polynom-pq+optimalhomog",),
            boundary=c.near,
            detail="supersolutions exist for rho > rho0 and not for rho <= rho*; rho0, rho* not explicit",
        )
    lstar = lambda_star(P.riesz)
    if abs(lam - lstar) <= BOUNDARY_TOL:
        c.near = True
    # lambda* is transcendental; a few ulps absorb its evaluation error
    at_threshold = abs(lam - lstar) <= LAMBDA_ULPS * np.spacing(lstar)
    if lam > lstar and not at_threshold:
        return Verdict(
            THRESHOLD,
            decay=decay,
            citations=("t-pq1",) if multi else ("proptsrn",),
            boundary=c.near,
            detail=f"lambda > lambda* = {lstar:.15g}: supersolutions exist for rho > rho0 (rho0 not explicit)",
        )
    if lam < lstar and multi and not at_threshold:
        return Verdict(NOT_EXISTS, citations=("t-pq1",), boundary=c.near)
    detail = "lambda = lambda*: no claim is made" if at_threshold else "lambda < lambda* with N = 1: no claim is made"
    return Verdict(OPEN, citations=("open-problem-pq1",), boundary=c.near, detail=detail)


# ---------------------------------------------------------------------------
# region maps


@dataclass(frozen=True, eq=False)
class RegionMap:
    dim: int
    alpha: float
    potential: PotentialSpec
    p_values: np.ndarray
    q_values: np.ndarray
    codes: np.ndarray  # shape (len(q_values), len(p_values)), dtype object

    def boundary_cells(self) -> list[tuple[int, int, int, int]]:
        """Pairs of adjacent cells ``(i, j, i2, j2)`` whose codes differ."""
        out = []
        nq, npv = self.codes.shape
        for i in range(nq):
            for j in range(npv):
                if j + 1 < npv and self.codes[i, j] != self.codes[i, j + 1]:
                    out.append((i, j, i, j + 1))
                if i + 1 < nq and self.codes[i, j] != self.codes[i + 1, j]:
                    out.append((i, j, i + 1, j))
        return out

    def legend(self) -> list[str]:
        return sorted(set(self.codes.ravel().tolist()))

    def analytic_lines(self) -> list[tuple[str, float, float, float]]:
        """Critical lines as ``(name, a, b, c)`` meaning ``a p + b q = c``."""
        return critical_lines(self.dim, self.alpha, self.potential)

    def boundary_offsets(self) -> np.ndarray:
        """Distance, in cell units, from each boundary edge midpoint to the nearest analytic line."""
        pairs = self.boundary_cells()
        lines = self.analytic_lines()
        if not pairs:
            return np.zeros(0)
        dp = self.p_values[1] - self.p_values[0] if self.p_values.size > 1 else 1.0
        dq = self.q_values[1] - self.q_values[0] if self.q_values.size > 1 else 1.0
        idx = np.array(pairs)
        pm = 0.5 * (self.p_values[idx[:, 1]] + self.p_values[idx[:, 3]])
        qm = 0.5 * (self.q_values[idx[:, 0]] + self.q_values[idx[:, 2]])
        if not lines:
            return np.full(pm.size, np.inf)
        dist = [np.abs(a * pm + b * qm - c) / math.hypot(a * dp, b * dq) for _, a, b, c in lines]
        return np.min(dist, axis=0)


def critical_lines(N: int, a: float, pot: PotentialSpec) -> list[tuple[str, float, float, float]]:
    v = pot.variant
    lines = []
    if v in ("zero", "fast") and N >= 3:
        lines += [
            ("p = alpha/(N-2)", 1.0, 0.0, a / (N - 2)),
            ("p + q = (N+alpha)/(N-2)", 1.0, 1.0, (N + a) / (N - 2)),
            ("q = alpha/(N-2)", 0.0, 1.0, a / (N - 2)),
        ]
        if a < N - 2:
            lines.append(("q = 1 - (N-alpha-2)p/N", (N - a - 2) / N, 1.0, 1.0))
    elif v == "hardy" and N >= 2:
        k = (N - 2) / 2 + pot.nu
        lines += [
            ("p = alpha/k", 1.0, 0.0, a / k),
            ("p + q = 1 + (alpha+2)/k", 1.0, 1.0, 1 + (a + 2) / k),
            ("q = 1 + (alpha-(N-2))/k", 0.0, 1.0, 1 + (a - (N - 2)) / k),
        ]
        if a < N - 2:
            lines.append(("q = 1 - (N-alpha-2)p/N", (N - a - 2) / N, 1.0, 1.0))
            if pot.nu < (N - 2) / 2:
                lines.append(("q = 1 - (N-alpha-2)/((N-2)/2-nu)", 0.0, 1.0, 1 - (N - a - 2) / ((N - 2) / 2 - pot.nu)))
    elif v == "slow":
        g = pot.gamma
        lines += [("q = 1", 0.0, 1.0, 1.0), ("p + q = 1", 1.0, 1.0, 1.0)]
        lines.append(("q = 1 - (N-alpha-gamma)p/N", (N - a - g) / N, 1.0, 1.0))
        if g <= -a:
            lines.append(("q = 1 + (gamma/alpha)p", -g / a, 1.0, 1.0))
    return lines


def parse_range(text: str) -> tuple[float, float]:
    """Parse an inclusive ``lo..hi`` range."""
    try:
        lo, hi = text.split("..")
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise DomainError(f"range must look like lo..hi, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise DomainError(f"range must satisfy lo <= hi with finite ends, got {text!r}")
    return lo, hi


def region_scan(
    dim: int,
    alpha: float,
    potential: PotentialSpec,
    p_range: tuple[float, float],
    q_range: tuple[float, float],
    resolution: int | tuple[int, int],
    rho: float = 1.0,
) -> RegionMap:
    """Classify cell centres of a ``(p, q)`` grid.

    A degenerate range ``lo == hi`` yields a single column or row.
    """
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    rp, rq = resolution
    if min(rp, rq) < 2:
        raise DomainError("resolution must be at least 2 per axis")
    pv = _centres(p_range, rp)
    qv = _centres(q_range, rq)
    codes = np.empty((qv.size, pv.size), dtype=object)
    for j, p in enumerate(pv):
        if p <= 0:
            codes[:, j] = "Invalid"
            continue
        for i, q in enumerate(qv):
            codes[i, j] = classify(ProblemParams(dim, alpha, float(p), float(q), potential, rho)).code
    return RegionMap(dim, alpha, potential, pv, qv, codes)


def _centres(rng, n):
    lo, hi = rng
    if lo == hi:
        return np.array([lo])
    step = (hi - lo) / n
    return lo + step * (np.arange(n) + 0.5)


_PALETTE = {
    "NotExists": "#d9d9d9",
    "Open": "#ffffff",
    "ThresholdDependent": "#fdd49e",
    "Invalid": "#000000",
}
_EXIST_COLOURS = ["#9ecae1", "#a1d99b", "#fc9272", "#bcbddc", "#fdae6b", "#c7e9c0", "#6baed6", "#fee391"]


def emit_region_diagram(rmap: RegionMap, fmt: str, path=None) -> str:
    """Render ``rmap`` as CSV (``p,q,code`` rows) or a static SVG 1.1 image.

    Returns the text; writes it to ``path`` when given.
    """
    if rmap.codes.size == 0:
        raise DomainError("empty region map")
    if fmt == "csv":
        rows = ["p,q,code"]
        for i, q in enumerate(rmap.q_values):
            for j, p in enumerate(rmap.p_values):
                rows.append(f"{p:.17g},{q:.17g},{rmap.codes[i, j]}")
        text = "\n".join(rows) + "\n"
    elif fmt == "svg":
        text = _svg(rmap)
    else:
        raise DomainError(f"unknown diagram format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def _svg(rmap: RegionMap) -> str:
    W = H = 600
    pad = 50
    pv, qv = rmap.p_values, rmap.q_values
    dp = (pv[1] - pv[0]) if pv.size > 1 else 1.0
    dq = (qv[1] - qv[0]) if qv.size > 1 else 1.0
    p0, p1 = pv[0] - dp / 2, pv[-1] + dp / 2
    q0, q1 = qv[0] - dq / 2, qv[-1] + dq / 2
    sx = W / (p1 - p0)
    sy = H / (q1 - q0)

    def X(p):
        return pad + (p - p0) * sx

    def Y(q):
        return pad + H - (q - q0) * sy

    colours = dict(_PALETTE)
    exist_codes = [c for c in rmap.legend() if c not in colours]
    for k, code in enumerate(exist_codes):
        colours[code] = _EXIST_COLOURS[k % len(_EXIST_COLOURS)]
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W + 2 * pad + 260}" height="{H + 2 * pad}">',
        f'<rect x="0" y="0" width="{W + 2 * pad + 260}" height="{H + 2 * pad}" fill="#ffffff"/>',
    ]
    cw, ch = dp * sx, dq * sy
    for i, q in enumerate(qv):
        for j, p in enumerate(pv):
            out.append(
                f'<rect x="{X(p - dp / 2):.3f}" y="{Y(q + dq / 2):.3f}" width="{cw:.3f}" height="{ch:.3f}" '
                f'fill="{colours[rmap.codes[i, j]]}" stroke="none"/>'
            )
    for name, a, b, c in rmap.analytic_lines():
        seg = _clip_line(a, b, c, p0, p1, q0, q1)
        if seg:
            (pa, qa), (pb, qb) = seg
            out.append(
                f'<line x1="{X(pa):.3f}" y1="{Y(qa):.3f}" x2="{X(pb):.3f}" y2="{Y(qb):.3f}" '
                f'stroke="#000000" stroke-width="1.5" stroke-dasharray="6,3"><title>{_esc(name)}</title></line>'
            )
    out.append(f'<rect x="{pad}" y="{pad}" width="{W}" height="{H}" fill="none" stroke="#000000"/>')
    out.append(f'<text x="{pad + W / 2}" y="{H + pad + 35}" text-anchor="middle" font-size="14">p</text>')
    out.append(f'<text x="15" y="{pad + H / 2}" font-size="14">q</text>')
    for val, pos in ((p0, X(p0)), (p1, X(p1))):
        out.append(f'<text x="{pos:.3f}" y="{H + pad + 18}" text-anchor="middle" font-size="11">{val:.4g}</text>')
    for val, pos in ((q0, Y(q0)), (q1, Y(q1))):
        out.append(f'<text x="{pad - 5}" y="{pos:.3f}" text-anchor="end" font-size="11">{val:.4g}</text>')
    for k, code in enumerate(rmap.legend()):
        y = pad + 20 * k
        out.append(f'<rect x="{W + 2 * pad}" y="{y}" width="14" height="14" fill="{colours[code]}" stroke="#000000"/>')
        out.append(f'<text x="{W + 2 * pad + 20}" y="{y + 12}" font-size="12">{_esc(code)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _clip_line(a, b, c, p0, p1, q0, q1):
    """Segment of ``a p + b q = c`` inside the box, or None."""
    pts = []
    if b != 0:
        for p in (p0, p1):
            q = (c - a * p) / b
            if q0 <= q <= q1:
                pts.append((p, q))
    if a != 0:
        for q in (q0, q1):
            p = (c - b * q) / a
            if p0 <= p <= p1:
                pts.append((p, q))
    pts = sorted(set(pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]
