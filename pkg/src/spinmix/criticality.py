"""Threshold computation and the singular-Hessian verdict.

Three thresholds are computed per model:

  beta_m        largest beta with max_{r in [0,1)^S} f_beta(r) = 0
  beta_m_tilde  same with the truncated functional (always >= beta_m)
  beta_H        smallest beta at which M(beta) = -diag(lam) + beta^2 Q
                acquires a nonnegative eigenvalue (closed form)

The verdict is EQUAL when M(beta_m) is singular to within tolerance (then
beta_m is the critical inverse-temperature and is reported as such),
STRICTLY_LESS when its top eigenvalue is clearly negative, and
INCONCLUSIVE when the mixture is not strictly positive off the origin on
the unit box (the hypothesis under which the verdict is meaningful) or
the eigenvalue cannot be classified.

The bisection thresholds are additionally capped at beta_H: above beta_H
the origin is unstable and the maximum is strictly positive, so beta_H is
an exact upper bound that removes the quadratic flattening bias of the
value predicate in origin-driven models.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .landscape import DOMAIN_CLAMP, TOL_ZERO, g_beta, hessian_at_zero, maximize_f
from .model import ModelSpec

__all__ = [
    "Verdict",
    "CritReport",
    "beta_m",
    "beta_m_tilde",
    "beta_hessian_singular",
    "beta_c_talagrand",
    "check_nsd",
    "verdict",
    "BracketError",
    "TOL_SING",
    "BISECT_TOL",
    "BETA_CAP",
]

TOL_SING = 1e-6     # singularity band, relative to the scale of M
BISECT_TOL = 1e-9   # absolute tolerance on beta
BETA_CAP = 1e6      # predicate holding beyond this reports +inf


class BracketError(RuntimeError):
    """Bisection invariant violated (predicate not monotone as evaluated)."""


class Verdict(str, enum.Enum):
    EQUAL = "EQUAL"
    STRICTLY_LESS = "STRICTLY_LESS"
    INCONCLUSIVE = "INCONCLUSIVE"


def _sing_scale(model: ModelSpec, beta: float) -> float:
    """Scale against which 'singular' is judged: |Lam| + beta^2 |Q|."""
    lam_norm = float(np.max(model.species.lam))
    Q = model.mixture.degree2_matrix()
    q_norm = float(np.max(np.abs(np.linalg.eigvalsh(Q)))) if Q.any() else 0.0
    return lam_norm + beta * beta * q_norm


def beta_hessian_singular(model: ModelSpec) -> float:
    """Smallest beta >= 0 with lambda_max(M(beta)) >= 0, in closed form.

    With Lam = diag(lam) and Q the degree-2 coefficient matrix, the
    threshold is 1/sqrt(mu_max) for mu_max the top eigenvalue of
    Lam^{-1/2} Q Lam^{-1/2}; infinite when Q = 0.  lambda_max(M(beta)) is
    nondecreasing in beta, so this is a genuine threshold.
    """
    Q = model.mixture.degree2_matrix()
    if not Q.any():
        return float("inf")
    inv_sqrt = np.diag(1.0 / np.sqrt(model.species.lam))
    mu = float(np.linalg.eigvalsh(inv_sqrt @ Q @ inv_sqrt).max())
    if mu <= 0.0:
        return float("inf")
    return float(1.0 / math.sqrt(mu))


def check_nsd(model: ModelSpec, beta: float) -> tuple[float, bool]:
    """Top eigenvalue of M(beta) and whether M(beta) is negative semi-definite."""
    lam_max = float(np.linalg.eigvalsh(hessian_at_zero(model, beta)).max())
    return lam_max, lam_max <= TOL_SING * _sing_scale(model, beta)


def _bisect(predicate, *, tol: float, cap: float = BETA_CAP):
    """Largest beta with predicate true, by doubling then bisection.

    ``predicate`` returns (bool, witness).  Returns (beta, lo_witness,
    hi_witness); beta is +inf when the predicate still holds at the cap.
    """
    lo = 0.0
    ok, w_lo = predicate(lo)
    if not ok:
        raise BracketError("predicate must hold at beta = 0")
    hi = 1.0
    w_hi = None
    while True:
        ok, w = predicate(hi)
        if not ok:
            w_hi = w
            break
        lo, w_lo = hi, w
        hi *= 2.0
        if hi > cap:
            return float("inf"), w_lo, None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, w = predicate(mid)
        if ok:
            lo, w_lo = mid, w
        else:
            hi, w_hi = mid, w
    return 0.5 * (lo + hi), w_lo, w_hi


def _threshold(
    model: ModelSpec,
    objective: str,
    *,
    tol: float,
    tol_zero: float,
    return_witnesses: bool,
):
    if model.xi1() <= 0.0:
        raise ValueError("threshold computation requires xi(1) > 0")

    def predicate(beta):
        res = maximize_f(model, beta, objective)
        return res.value <= tol_zero, res

    b, w_lo, w_hi = _bisect(predicate, tol=tol)
    b = min(b, beta_hessian_singular(model))
    if return_witnesses:
        return b, w_lo, w_hi
    return b


def beta_m(model: ModelSpec, *, tol: float = BISECT_TOL, tol_zero: float = TOL_ZERO) -> float:
    """Second-moment threshold: largest beta with max f_beta = 0."""
    return _threshold(model, "plain", tol=tol, tol_zero=tol_zero, return_witnesses=False)


def beta_m_tilde(model: ModelSpec, *, tol: float = BISECT_TOL, tol_zero: float = TOL_ZERO) -> float:
    """Threshold of the truncated functional; upper-bounds beta_m."""
    return _threshold(model, "tilde", tol=tol, tol_zero=tol_zero, return_witnesses=False)


def _sup_g(model: ModelSpec, beta: float) -> float:
    """sup of g_beta over [0, 1), by dense scan plus local refinement."""
    hi = 1.0 - DOMAIN_CLAMP
    rs = np.linspace(0.0, hi, 4001)
    vals = np.log1p(-rs) + rs + beta * beta * np.asarray(model.mixture.eval(rs[:, None]))
    i = int(np.argmax(vals))
    best = float(vals[i])
    a = rs[max(i - 1, 0)]
    b = rs[min(i + 1, len(rs) - 1)]
    if b > a:
        res = minimize_scalar(
            lambda r: -g_beta(model, beta, float(np.clip(r, 0.0, hi))),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, -float(res.fun))
    return best


def beta_c_talagrand(
    model: ModelSpec, *, tol: float = BISECT_TOL, tol_zero: float = TOL_ZERO
) -> float:
    """Single-species critical inverse-temperature via the g criterion.

    Bisection on [sup_r g_beta(r) <= 0], capped at the origin-instability
    threshold (g''(0) = lambda_max of M(beta) when |S| = 1).  Serves as an
    independent oracle for beta_c in the single-species case.
    """
    if model.n_species != 1:
        raise ValueError("the g criterion applies to single-species models only")
    if model.xi1() <= 0.0:
        raise ValueError("requires xi(1) > 0")

    def predicate(beta):
        s = _sup_g(model, beta)
        return s <= tol_zero, s

    b, _, _ = _bisect(predicate, tol=tol)
    return min(b, beta_hessian_singular(model))


@dataclass(frozen=True)
class CritReport:
    """Thresholds, spectrum at beta_m, verdict, witnesses and tolerances."""

    beta_m: float
    beta_m_tilde: float
    beta_H: float
    spectrum_at_beta_m: tuple[float, ...]
    verdict: Verdict
    xi_positive_off_origin: bool
    beta_c: float | None
    witnesses: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "beta_m": self.beta_m,
            "beta_m_tilde": self.beta_m_tilde,
            "beta_H": self.beta_H if np.isfinite(self.beta_H) else "inf",
            "spectrum_at_beta_m": list(self.spectrum_at_beta_m),
            "verdict": self.verdict.value,
            "xi_positive_off_origin": self.xi_positive_off_origin,
            "beta_c": self.beta_c,
            "witnesses": self.witnesses,
            "tolerances": self.tolerances,
        }

    def to_json(self, **extra) -> str:
        doc = self.to_dict()
        doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def verdict(
    model: ModelSpec,
    *,
    tol: float = BISECT_TOL,
    tol_zero: float = TOL_ZERO,
    tol_sing: float = TOL_SING,
) -> CritReport:
    """Full criticality report for a model.

    EQUAL means beta_c equals beta_m and is reported; STRICTLY_LESS means
    beta_m < beta_c and beta_c itself is not computed (beta_m_tilde is a
    certified lower bound on beta_c); INCONCLUSIVE withholds the verdict.
    """
    positive = model.mixture.positive_off_origin()
    b_m, w_lo, w_hi = _threshold(
        model, "plain", tol=tol, tol_zero=tol_zero, return_witnesses=True
    )
    b_t = beta_m_tilde(model, tol=tol, tol_zero=tol_zero)
    b_H = beta_hessian_singular(model)
    spectrum = tuple(float(v) for v in np.linalg.eigvalsh(hessian_at_zero(model, b_m)))
    lam_max = spectrum[-1]
    band = tol_sing * _sing_scale(model, b_m)
    if not positive:
        v = Verdict.INCONCLUSIVE
    elif abs(lam_max) <= band:
        v = Verdict.EQUAL
    elif lam_max < -band:
        v = Verdict.STRICTLY_LESS
    else:
        v = Verdict.INCONCLUSIVE

    def _witness(tag, res):
        if res is None:
            return {}
        return {
            f"argmax_{tag}": [float(x) for x in res.argmax],
            f"value_{tag}": float(res.value),
            f"converged_{tag}": bool(res.converged),
        }

    witnesses = {}
    witnesses.update(_witness("lo", w_lo))
    witnesses.update(_witness("hi", w_hi))
    return CritReport(
        beta_m=float(b_m),
        beta_m_tilde=float(b_t),
        beta_H=float(b_H),
        spectrum_at_beta_m=spectrum,
        verdict=v,
        xi_positive_off_origin=positive,
        beta_c=float(b_m) if v is Verdict.EQUAL else None,
        witnesses=witnesses,
        tolerances={"tol_zero": tol_zero, "tol_sing": tol_sing, "bisect_tol": tol},
    )
