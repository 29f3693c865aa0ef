"""Acceptance criteria, one test each, with stated tolerances and time budgets.

Each test prints ``PASS`` or ``FAIL`` with its measured runtime; the lines are
repeated in the pytest terminal summary.
"""

import math
import time

import numpy as np

import acceptance_log
from choquard.agmon import LinearProblem, incomplete_beta_form, minimal_solution, psi_expansion, psi_integral
from choquard.errors import NoAdmissibleMu
from choquard.forms import (
    TestFunction,
    best_truncated_power,
    dirichlet_energy,
    positivity_gap,
    rayleigh_quotient,
    riesz_energy,
    weighted_mass,
)
from choquard.regimes import PotentialSpec as V, ProblemParams, classify, region_scan
from choquard.riesz import (
    EnvelopeClass,
    RadialFunction,
    RieszParams,
    lambda_star,
    log_grid,
    radial_convolution,
    sigma_star,
)
from choquard.supersolutions import pick_mu, verify
from sampling import sample_tuples
from test_forms import _family
from test_regimes import BOUNDARY, sig_close
from test_supersolutions import IN_REGION, OUT_OF_REGION
from theorem_table import table, verdict_signature


def report(n, title, ok, elapsed, budget, detail=""):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"{status} criterion {n}: {title} ({elapsed:.3f} s, budget {budget:g} s){' ' + detail if detail else ''}"
    print(line)
    acceptance_log.LINES.append(line)
    assert ok, line
    assert within, line


def test_criterion_1_stein_weiss_constants():
    t = time.perf_counter()
    P = RieszParams(3, 2)
    s, l = float(sigma_star(P)), float(lambda_star(P))
    elapsed = time.perf_counter() - t
    # sigma at beta = 5/2: Gamma(1/4)^2 / (4 Gamma(5/4)^2) with Gamma(5/4) = Gamma(1/4) / 4
    g = math.gamma(0.25)
    oracle = g * g / (4 * (g / 4) ** 2)
    ok = abs(s / oracle - 1) <= 1e-12 and abs(l / math.sqrt(oracle) - 1) <= 1e-12
    report(1, "sigma* = 4, lambda* = 2", ok, elapsed, 1e-3, f"sigma*={s!r} lambda*={l!r}")


def test_criterion_2_semigroup_identity():
    t = time.perf_counter()
    P = RieszParams(3, 2)
    g = log_grid(1e-3, 1e5)
    out = radial_convolution(RadialFunction(g, g**-2.5, tail=EnvelopeClass.power(2.5)), P)
    elapsed = time.perf_counter() - t
    mid = (g >= 1) & (g <= 10)
    err = float(np.max(np.abs(out.values[mid] / (4 * g[mid] ** -0.5) - 1)))
    report(2, "I_2 * s^-5/2 = 4 r^-1/2 on [1, 10]", err < 1e-2, elapsed, 5, f"max rel err {err:.2e}")


def test_criterion_3_classifier_truth_table():
    t = time.perf_counter()
    bad = []
    sample = sample_tuples(10_000, seed=2024)
    for params, kw in sample:
        if not sig_close(verdict_signature(classify(params)), table(**kw)):
            bad.append(kw)
    kinds = {kw["kind"] for _, kw in sample}
    boundary_bad = []
    for params, existence, variant in BOUNDARY:
        v = classify(params)
        if v.existence != existence or (v.decay.variant if v.decay else None) != variant:
            boundary_bad.append(params)
    elapsed = time.perf_counter() - t
    ok = not bad and not boundary_bad and kinds == {"zero", "fast", "hardy", "slow"}
    report(3, "classifier agrees with predicate table", ok, elapsed, 10,
           f"{len(sample)} sampled, {len(bad)} mismatches; {len(BOUNDARY)} boundary, {len(boundary_bad)} mismatches")


def test_criterion_4_ode_oracle():
    t = time.perf_counter()
    S = minimal_solution(LinearProblem(3, 0.0, 1.0), 50)
    g = S.profile.grid
    ratio = np.exp(S.log_values) * g * np.exp(g)
    yukawa = float(np.max(np.abs(ratio / ratio[0] - 1)))
    S2 = minimal_solution(LinearProblem(3, 1.0, 1.0, 0.1, 2.0), 1e3)
    last = S2.profile.grid >= 100
    nr = S2.normalized_ratio()[last]
    elapsed = time.perf_counter() - t
    ok = yukawa <= 1e-6 and nr.min() >= 0.98 and nr.max() <= 1.02
    report(4, "minimal solution oracles", ok, elapsed, 5,
           f"Yukawa rel err {yukawa:.1e}; ratio in [{nr.min():.4f}, {nr.max():.4f}]")


def test_criterion_5_supersolution_verification():
    t = time.perf_counter()
    failures = []
    for family, P, kw in IN_REGION:
        try:
            rep = verify(family, P, **kw)
        except NoAdmissibleMu as exc:
            failures.append(f"{family}: {exc}")
            continue
        if not (rep.grid[0] == P.rho and rep.grid[-1] >= 1e4 * P.rho * (1 - 1e-12) and np.min(rep.certified) >= 0):
            failures.append(f"{family}: certified min {np.min(rep.certified):.2e}")
    for family, P in OUT_OF_REGION:
        try:
            mu = pick_mu(family, P)
            failures.append(f"{family} out of region accepted mu={mu}")
        except NoAdmissibleMu:
            pass
    elapsed = time.perf_counter() - t
    report(5, "9 constructions certified, 3 out-of-region rejected", not failures, elapsed, 60, "; ".join(failures))


def test_criterion_6_psi_expansion():
    t = time.perf_counter()
    P = LinearProblem(1, 0.0, 1.0, 0.25, 1.0)
    diff = [psi_integral(P, 1.0, r) - psi_expansion(P, 1.0, r, 1)[0] for r in np.geomspace(1e2, 1e4, 9)]
    spread = max(diff) - min(diff)
    g, lam, m = 0.5, 1.0, 0.1
    P2 = LinearProblem(3, g, lam, m, 1.0, rho=(m / lam**2) ** (1 / (1 - g)))
    worst = max(abs(incomplete_beta_form(g, lam, m, x) / psi_integral(P2, P2.rho, x) - 1)
                for x in (0.2, 1.0, 7.0, 300.0))
    elapsed = time.perf_counter() - t
    report(6, "psi remainder and incomplete Beta form", spread < 0.05 and worst <= 1e-8, elapsed, 2,
           f"spread {spread:.2e}, Beta rel err {worst:.1e}")


def test_criterion_7_rayleigh_threshold():
    t = time.perf_counter()
    notes, ok = [], True
    for N, a in ((3, 2), (5, 1)):
        P = RieszParams(N, a)
        top = sigma_star(P)
        best, _ = best_truncated_power(P)
        worst = max(rayleigh_quotient(phi, P, nodes_per_decade=64) for phi in _family(N, a))
        ok &= best >= 0.95 * top and max(best, worst) <= top * (1 + 1e-3)
        notes.append(f"({N},{a}) best {best / top:.4f} max {max(best, worst) / top:.4f}")
    wide = TestFunction(3, 1.0, 1e12, weight=-2.5)
    signs = {}
    for lam in (1.0, 1.9, 2.1, 3.0):
        P = ProblemParams(3, 2, 0.5, 0.5, V.slow(lam, -2))
        signs[lam] = min(positivity_gap(wide.scaled(R), P, nodes_per_decade=32).gap for R in (10, 100, 1000))
    ok &= signs[1.0] < 0 and signs[1.9] < 0 and signs[2.1] >= 0 and signs[3.0] >= 0
    notes.append("gap signs " + " ".join(f"{k}:{'-' if v < 0 else '+'}" for k, v in signs.items()))
    elapsed = time.perf_counter() - t
    report(7, "Rayleigh quotient threshold and gap flip at lambda*", ok, elapsed, 30, "; ".join(notes))


def test_criterion_8_scaling_identities():
    t = time.perf_counter()
    worst = 0.0
    gamma = 0.5
    for N, a, phi in ((3, 2.0, TestFunction.calibration(3)), (5, 1.0, TestFunction(5, 0.7, 3.0, weight=-1.0))):
        P = RieszParams(N, a)
        base = (dirichlet_energy(phi), weighted_mass(phi, -gamma), riesz_energy(phi, P))
        for R in (2.0, 8.0, 32.0):
            big = phi.scaled(R)
            got = (dirichlet_energy(big), weighted_mass(big, -gamma), riesz_energy(big, P))
            want = (R ** (N - 2) * base[0], R ** (N - gamma) * base[1], R ** (N + a) * base[2])
            worst = max(worst, *(abs(x / y - 1) for x, y in zip(got, want)))
    elapsed = time.perf_counter() - t
    report(8, "energy scaling laws", worst <= 1e-6, elapsed, 5, f"worst rel err {worst:.1e}")


def test_criterion_9_region_diagrams():
    t = time.perf_counter()
    notes, ok = [], True
    for N, a in ((4, 3), (5, 1)):
        m = region_scan(N, a, V.zero(), (0, 6), (-1, 3), 200)
        off = m.boundary_offsets()
        ok &= off.size > 0 and off.max() <= 1.0
        notes.append(f"({N},{a}) max offset {off.max():.2f} cells")
    strip = region_scan(3, 2, V.slow(1, 1.5), (0.05, 6), (-1, 0.99), 200)
    ok &= set(strip.codes.ravel()) == {"NotExists"}
    wedge = region_scan(3, 2, V.slow(1, 0), (0.05, 6), (-1, 0.99), 200)
    wedge_codes = set(wedge.codes.ravel())
    ok &= wedge_codes == {"NotExists", "Exists:decay-slow-moderate"} and wedge.boundary_offsets().max() <= 1.0
    fast = region_scan(3, 2, V.slow(1, -4), (0.05, 6), (-1, 0.99), 200)
    ok &= set(fast.codes.ravel()) == {"NotExists", "Exists:C-1", "Exists:C-3"} and fast.boundary_offsets().max() <= 1.0
    notes.append(f"strip {len(set(strip.codes.ravel()))} code, wedge {len(wedge_codes)}, "
                 f"fast {len(set(fast.codes.ravel()))}")
    elapsed = time.perf_counter() - t
    report(9, "region diagrams", ok, elapsed, 20, "; ".join(notes))
