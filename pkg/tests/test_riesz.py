import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choquard.errors import DomainError, TailDivergence
from choquard.riesz import (
    EnvelopeClass as Env,
    RadialFunction,
    RieszParams,
    _spherical_mean,
    asymptotic_envelope,
    lambda_star,
    log_grid,
    log_step,
    normalization_constant,
    radial_convolution,
    radial_integral,
    semigroup_oracle,
    sigma,
    sigma_star,
    sphere_area,
)


def mp_A(N, a):
    with mpmath.workdps(30):
        return float(mpmath.gamma(mpmath.mpf(N - a) / 2) / (mpmath.gamma(mpmath.mpf(a) / 2) * mpmath.pi ** (mpmath.mpf(N) / 2) * 2 ** mpmath.mpf(a)))


def mp_sigma(N, a, b):
    with mpmath.workdps(30):
        g = mpmath.gamma
        N, a, b = (mpmath.mpf(x) for x in (N, a, b))
        return float(2 ** (-a) * g((b - a) / 2) * g((N - b) / 2) / (g((N - b + a) / 2) * g(b / 2)))


# --- constants ----------------------------------------------------------------


def test_normalization_three_two():
    assert normalization_constant(RieszParams(3, 2)) == pytest.approx(1 / (4 * math.pi), rel=1e-14)


def test_normalization_four_two():
    assert normalization_constant(RieszParams(4, 2)) == pytest.approx(1 / (4 * math.pi**2), rel=1e-14)


@pytest.mark.parametrize("N,a", [(3, 1.5), (1, 0.3), (2, 1.7), (7, 4.25), (3, 2.999)])
def test_normalization_matches_high_precision(N, a):
    assert normalization_constant(RieszParams(N, a)) == pytest.approx(mp_A(N, a), rel=1e-13)


def test_sigma_three_two():
    assert sigma(RieszParams(3, 2), 2.5) == pytest.approx(4, rel=1e-14)


@pytest.mark.parametrize("b", [2.2, 2.4, 2.8])
def test_sigma_symmetry_examples(b):
    P = RieszParams(3, 2)
    assert sigma(P, b) == pytest.approx(sigma(P, 5 - b), rel=1e-12)


def test_sigma_star_five_one():
    P = RieszParams(5, 1)
    assert sigma_star(P) == pytest.approx(2 / math.pi, rel=1e-14)
    assert sigma(P, 3) == sigma_star(P)


def test_sigma_star_three_two():
    P = RieszParams(3, 2)
    assert sigma_star(P) == pytest.approx(4, rel=1e-12)
    assert lambda_star(P) == pytest.approx(2, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(N=st.integers(1, 8), af=st.floats(0.02, 0.98), bf=st.floats(0.01, 0.99))
def test_sigma_symmetry_minimality_and_oracle(N, af, bf):
    a = af * N
    P = RieszParams(N, a)
    b = a + bf * (N - a)
    s = sigma(P, b)
    assert s == pytest.approx(sigma(P, N + a - b), rel=1e-12)
    assert s >= sigma_star(P) * (1 - 1e-13)
    assert s == pytest.approx(mp_sigma(N, a, b), rel=1e-11)
    assert sigma_star(P) == pytest.approx(lambda_star(P) ** 2, rel=1e-12)


def test_sigma_domain():
    with pytest.raises(DomainError):
        sigma(RieszParams(3, 2), 2)
    with pytest.raises(DomainError):
        sigma(RieszParams(3, 2), 3)


def test_semigroup_oracle_values():
    assert semigroup_oracle(RieszParams(3, 2), 2.5, 1.0) == pytest.approx(4)
    assert semigroup_oracle(RieszParams(3, 2), 2.5, 4.0) == pytest.approx(2)
    assert semigroup_oracle(RieszParams(5, 1), 3, 1.0) == pytest.approx(2 / math.pi)


def test_params_validation():
    for N, a in [(3, 0), (3, 3), (0, 0.5), (2.5, 1)]:
        with pytest.raises(DomainError):
            RieszParams(N, a)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


# --- spherical mean of the kernel -----------------------------------------------


@pytest.mark.parametrize("N,a", [(2, 1.0), (3, 0.5), (3, 2.0), (4, 1.5), (5, 1.0), (2, 0.3), (6, 5.5)])
@pytest.mark.parametrize("d", [1e-4, 0.01, 0.2, 0.3, 1.0, 4.0])
def test_spherical_mean_matches_angular_integral(N, a, d):
    t = math.exp(-d)
    with mpmath.workdps(25):
        e = mpmath.mpf(a - N) / 2
        w = lambda th: (1 + t * t - 2 * t * mpmath.cos(th)) ** e * mpmath.sin(th) ** (N - 2)
        pts = [0, d / 4, d, 4 * d, mpmath.pi] if d < 0.5 else [0, mpmath.pi]
        num = mpmath.quad(w, pts)
        den = mpmath.quad(lambda th: mpmath.sin(th) ** (N - 2), [0, mpmath.pi])
        ref = float(num / den)
    assert float(_spherical_mean(N, a, np.array([d]))[0]) == pytest.approx(ref, rel=1e-9)


def test_spherical_mean_one_dimension_two_point():
    a, d = 0.5, 0.7
    t = math.exp(-d)
    ref = 0.5 * ((1 - t) ** (a - 1) + (1 + t) ** (a - 1))
    assert float(_spherical_mean(1, a, np.array([d]))[0]) == pytest.approx(ref, rel=1e-13)


# --- convolution ------------------------------------------------------------------


def power_input(b, lo=1e-3, hi=1e5):
    g = log_grid(lo, hi)
    return RadialFunction(g, g**-b, tail=Env.power(b))


def test_zero_input_gives_zero():
    g = log_grid(1e-2, 1e2)
    out = radial_convolution(RadialFunction(g, np.zeros_like(g), tail=Env.compact_support()), RieszParams(3, 2))
    assert np.all(out.values == 0)


@pytest.mark.parametrize("N,a,b", [(3, 2, 2.5), (3, 2, 2.2), (5, 1, 3), (5, 1, 2), (3, 0.5, 2), (1, 0.5, 0.8),
                                   (2, 1, 1.5), (4, 1.5, 3)])
def test_semigroup_identity(N, a, b):
    P = RieszParams(N, a)
    f = power_input(b)
    out = radial_convolution(f, P)
    ex = semigroup_oracle(P, b, f.grid)
    mid = (f.grid >= 1) & (f.grid <= 10)
    assert np.max(np.abs(out.values[mid] / ex[mid] - 1)) < 1e-8
    assert np.max(np.abs(out.values / ex - 1)) < 1e-8
    assert np.all(out.error_bound[mid] < 1e-8 * ex[mid])


def test_exponential_input_against_cumulative_formula():
    # For N = 3, alpha = 2 the potential is (1/r) int_0^r f s^2 ds + int_r^inf f s ds
    g = log_grid(1e-3, 60)
    f = RadialFunction(g, np.exp(-g), tail=Env.exponential(1.0), profile=lambda s: np.exp(-s))
    out = radial_convolution(f, RieszParams(3, 2))
    r = g
    ref = (2 - np.exp(-r) * (r * r + 2 * r + 2)) / r + np.exp(-r) * (r + 1)
    # small r: use the series to avoid cancellation in the reference
    small = r < 1e-2
    ref[small] = 1 - r[small] ** 2 / 6 + r[small] ** 3 / 12
    assert np.max(np.abs(out.values / ref - 1)) < 1e-9


def test_compact_input_outside_support_is_pure_power():
    # Newton's theorem: outside the support the potential is mass / (4 pi r) for N = 3, alpha = 2
    g = log_grid(0.1, 100)
    bump = lambda s: np.where(s < 1, (1 - s * s) ** 2, 0.0)
    f = RadialFunction(g, bump(g), tail=Env.compact_support(), profile=bump)
    out = radial_convolution(f, RieszParams(3, 2))
    mass = 4 * math.pi * (1 / 3 - 2 / 5 + 1 / 7)
    far = g > 1.5
    assert np.allclose(out.values[far], mass / (4 * math.pi * g[far]), rtol=1e-6)


@settings(max_examples=15, deadline=None)
@given(
    c=st.lists(st.floats(0, 2), min_size=3, max_size=3),
    d=st.lists(st.floats(0, 1), min_size=3, max_size=3),
    N=st.sampled_from([1, 2, 3, 5]),
)
def test_convolution_monotone(c, d, N):
    P = RieszParams(N, 0.7 if N < 3 else 2.0)
    g = log_grid(1e-2, 1e2, 24)
    b = N + 0.5
    basis = [g**-b, np.exp(-g), 1 / (1 + g) ** b]
    f = sum(ci * bi for ci, bi in zip(c, basis))
    h = f + sum(di * bi for di, bi in zip(d, basis))
    tail = Env.power(b)
    lo = radial_convolution(RadialFunction(g, f, tail=tail, inner_radius=g[0]), P).values
    hi = radial_convolution(RadialFunction(g, h, tail=tail, inner_radius=g[0]), P).values
    assert np.all(lo <= hi * (1 + 1e-9) + 1e-300)


def test_tail_divergence():
    g = log_grid(1e-2, 1e2)
    with pytest.raises(TailDivergence):
        radial_convolution(RadialFunction(g, g**-1.5, tail=Env.power(1.5)), RieszParams(3, 2))


def test_missing_envelope_warns_and_bounds():
    g = log_grid(1e-2, 1e3)
    f = RadialFunction(g, g**-4.0, inner_radius=g[0])
    with pytest.warns(UserWarning):
        out = radial_convolution(f, RieszParams(3, 2))
    assert np.all(out.error_bound > 0)


def test_non_log_uniform_grid_rejected():
    g = np.array([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DomainError):
        log_step(g)


# --- envelopes -----------------------------------------------------------------------


def test_envelope_examples():
    P = RieszParams(3, 2)
    assert asymptotic_envelope(Env.power(2.5), P) == Env.power(0.5)
    assert asymptotic_envelope(Env.power(3), P) == Env.power_log(1, 1)
    assert asymptotic_envelope(Env.power(4), P) == Env.power(1)
    assert asymptotic_envelope(Env.power_log(3, 0), P) == Env.power_log(1, 1)
    assert asymptotic_envelope(Env.power_log(3, -1), P) == Env.log_log(1)
    assert asymptotic_envelope(Env.power_log(3, -2), P) == Env.power(1)
    with pytest.raises(DomainError):
        asymptotic_envelope(Env.power(1.5), P)


ENVELOPE_CASES = [
    (3, 2.0, Env.power(2.5)),
    (3, 2.0, Env.power(3)),
    (3, 2.0, Env.power(4)),
    (5, 1.0, Env.power(3)),
    (3, 2.0, Env.power_log(3, -2)),
    (3, 2.0, Env.power_log(3, -1)),
    (3, 2.0, Env.power_log(3, 0.5)),
]


@pytest.mark.parametrize("N,a,env", ENVELOPE_CASES)
def test_envelope_soundness(N, a, env):
    P = RieszParams(N, a)
    g = log_grid(1e-2, 1e6, 32)
    prof = lambda s: np.exp(env.log_shape(s)) / (1 + s ** -4.0)
    f = RadialFunction(g, prof(g), tail=env, profile=prof)
    out = radial_convolution(f, P)
    target = asymptotic_envelope(env, P)
    last = g >= g[-1] / 100
    ratio = out.values[last] / np.exp(target.log_shape(g[last]))
    assert ratio.max() / ratio.min() < 3


def test_envelope_order_key_ranks_decay():
    assert Env.power(2).order_key() < Env.power(3).order_key()
    assert Env.power(3).order_key() < Env.exponential(1.0).order_key()
    assert Env.power_log(3, 1).order_key() < Env.power(3).order_key()


def test_envelope_dict_round_trip():
    for e in (Env.power(2), Env.power_log(1, -2), Env.log_log(2), Env.exponential(0.5, 0.5, 1.0),
              Env.compact_support()):
        assert Env.from_dict(e.to_dict()) == e


# --- serialisation and integration ---------------------------------------------------


def test_csv_round_trip(tmp_path):
    g = log_grid(1e-2, 1e2, 16)
    f = RadialFunction(g, np.exp(-g) / g, tail=Env.exponential(1.0, 1.0, 1.0), inner_radius=0.005)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,value"
    assert all(len(x.split(",")[0].split("e")[0].replace(".", "").replace("-", "")) == 17 for x in lines[1:])
    back = RadialFunction.from_csv(path)
    assert np.array_equal(back.grid, f.grid) and np.array_equal(back.values, f.values)
    assert back.tail == f.tail and back.inner_radius == f.inner_radius


def test_radial_integral_exponential():
    val = radial_integral(lambda r: np.exp(-r), 0.0 + 1e-12, 60, 3)
    assert val == pytest.approx(8 * math.pi, rel=1e-10)


def test_interpolation_is_exact_for_powers():
    g = log_grid(1, 100, 8)
    f = RadialFunction(g, g**-2.3, tail=Env.power(2.3))
    r = np.array([1.37, 55.5, 250.0])
    assert np.allclose(f(r), r**-2.3, rtol=1e-12)
