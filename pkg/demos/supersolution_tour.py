"""Pick an amplitude for each construction family and show the certified residual margin."""

from choquard.errors import NoAdmissibleMu
from choquard.regimes import PotentialSpec as V, ProblemParams
from choquard.riesz import RieszParams, lambda_star
from choquard.supersolutions import verify

LS = lambda_star(RieszParams(3, 1))
CASES = [
    ("GreenDecay", ProblemParams(3, 1, 2.5, 2), {}),
    ("LogCorrected", ProblemParams(3, 0.5, 4, 0.5), {}),
    ("PowerShift", ProblemParams(3, 1, 4, 1), {"m": 0.2}),
    ("Sublinear", ProblemParams(5, 1, 3, 0), {}),
    ("HardySublinear", ProblemParams(5, 1, 3, 0, V.hardy(1.0)), {}),
    ("SlowPoly", ProblemParams(3, 1, 2, 0.5, V.slow(1, 0)), {}),
    ("SlowLog", ProblemParams(3, 1, 0.375, 0.25, V.slow(1, -4)), {}),
    ("SlowHom", ProblemParams(3, 1, 0.5, 0.5, V.slow(2 * LS, -1), rho=4), {}),
    ("ExpMinimal", ProblemParams(3, 1, 2, 2, V.slow(1, 0)), {}),
    ("GreenDecay", ProblemParams(3, 2, 3, 1.5), {}),  # below the Green threshold: must fail
]

for family, params, kw in CASES:
    try:
        rep = verify(family, params, **kw)
        print(f"{family:15s} mu = {rep.mu_used:<12.6g} min certified residual = {rep.min_residual:.3e}")
    except NoAdmissibleMu as exc:
        print(f"{family:15s} rejected: {exc}")
