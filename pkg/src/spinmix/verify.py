"""Self-verification battery for the finite-N Monte Carlo engine.

Runs deterministic and statistical checks of the model identities at desk
scale: the two-route covariance certification, the empirical disorder
covariance, free-energy and level-set estimates against their asymptotic
values, the band free energy against its conditional-mean prediction, and
the exact second-moment quadrature (zero at beta = 0, residual shrinking
with N).  Everything is driven by a single seed through counter-based
streams, so repeated runs produce byte-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import criticality, montecarlo, quadrature
from .model import ModelSpec
from .rng import stream

__all__ = ["CheckResult", "VerifyRun", "run_verify"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: float
    bound: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "observed", float(self.observed))
        object.__setattr__(self, "bound", float(self.bound))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "observed": _finite(self.observed),
            "bound": _finite(self.bound),
            "detail": self.detail,
        }


def _finite(x: float):
    return float(x) if math.isfinite(x) else repr(float(x))


@dataclass(frozen=True)
class VerifyRun:
    checks: tuple[CheckResult, ...]
    table: tuple[dict, ...]  # rows: beta, N, estimate, stderr, prediction, residual
    records: tuple[dict, ...] = ()  # estimator records with full run context

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _random_instance(model_rng: np.random.Generator):
    """A random small two-species mixture with a finite-N realization."""
    n_species = int(model_rng.integers(1, 3))
    names = ("a", "b")[:n_species]
    if n_species == 1:
        lam = np.array([1.0])
    else:
        w = model_rng.uniform(0.25, 0.75)
        lam = np.array([w, 1.0 - w])
    terms = {}
    for _ in range(int(model_rng.integers(1, 5))):
        while True:
            degs = tuple(int(d) for d in model_rng.integers(0, 5, size=n_species))
            if 2 <= sum(degs) <= 4:
                break
        terms[degs] = terms.get(degs, 0.0) + float(model_rng.uniform(0.1, 2.0))
    from .mixture import Mixture, SpeciesSet

    ms = ModelSpec(SpeciesSet(names, lam), Mixture.from_terms(names, terms))
    N = int(model_rng.integers(max(12, 3 * n_species), 25))
    return montecarlo.build_finite_model(ms, N)


def _covariance_spot_checks(seed: int, n_instances: int = 10) -> CheckResult:
    rng = stream(seed, 101)
    worst = 0.0
    try:
        for _ in range(n_instances):
            fm = _random_instance(rng)
            a = montecarlo.sample_uniform(fm, rng)
            b = montecarlo.sample_uniform(fm, rng)
            r1 = montecarlo.covariance_exact(fm, a, b)
            r2 = fm.N * float(fm.model.mixture.eval(montecarlo.overlap(fm, a, b)))
            worst = max(worst, abs(r1 - r2) / max(1.0, abs(r2)))
    except montecarlo.CoefficientLawError as exc:
        return CheckResult("covariance-two-route", False, float("inf"), 1e-10, str(exc))
    return CheckResult("covariance-two-route", worst <= 1e-10, worst, 1e-10,
                       f"{n_instances} random instances")


def _empirical_covariance(model: ModelSpec, seed: int, n_disorders: int = 2000) -> CheckResult:
    fm = montecarlo.build_finite_model(model, 24)
    rng = stream(seed, 102)
    a = montecarlo.sample_uniform(fm, rng)
    b = montecarlo.sample_uniform(fm, rng)
    exact = montecarlo.covariance_exact(fm, a, b)
    prods = np.empty(n_disorders)
    for i in range(n_disorders):
        d = montecarlo.sample_disorder(fm, seed=(seed << 20) + i)
        prods[i] = montecarlo.evaluate_H(d, a) * montecarlo.evaluate_H(d, b)
    se = float(prods.std(ddof=1)) / math.sqrt(n_disorders)
    dev = abs(float(prods.mean()) - exact)
    return CheckResult("empirical-covariance", dev <= 5.0 * se, dev, 5.0 * se,
                       f"{n_disorders} disorder draws at N=24")


def run_verify(model: ModelSpec, *, N: int, n_samples: int, seed: int) -> VerifyRun:
    """Run the full battery; raises ValueError when N or the model are out
    of range for the quadrature and tensor budget."""
    if model.n_species > 3:
        raise ValueError("verification battery supports at most 3 species")
    checks: list[CheckResult] = []
    table: list[dict] = []

    checks.append(_covariance_spot_checks(seed))
    checks.append(_empirical_covariance(model, seed))

    b_m = criticality.beta_m(model)
    beta = 0.5 * b_m if math.isfinite(b_m) else 0.25
    xi1 = model.xi1()
    fm = montecarlo.build_finite_model(model, N)
    disorder = montecarlo.sample_disorder(fm, seed=seed)

    fe = montecarlo.estimate_free_energy(fm, disorder, beta, n_samples, seed=seed)
    fe_target = 0.5 * beta * beta * xi1
    dev = abs(fe.estimate - fe_target)
    checks.append(CheckResult("free-energy", dev <= 0.1, dev, 0.1,
                              f"beta={beta!r} N={N} n={n_samples}"))
    table.append({"beta": beta, "N": N, "estimate": fe.estimate, "stderr": fe.std_error,
                  "prediction": fe_target, "residual": fe.estimate - fe_target})

    ls = montecarlo.estimate_level_set(fm, disorder, beta, 0.05, n_samples, seed=seed)
    ls_target = -fe_target
    dev = abs(ls.estimate - ls_target) if math.isfinite(ls.estimate) else float("inf")
    checks.append(CheckResult("level-set", dev <= 0.15, dev, 0.15,
                              f"epsilon=0.05 hits={ls.n_hits}"))
    table.append({"beta": beta, "N": N, "estimate": ls.estimate, "stderr": ls.std_error,
                  "prediction": ls_target, "residual": ls.estimate - ls_target})

    center = montecarlo.sample_uniform(fm, stream(seed, 103))
    h_center = montecarlo.evaluate_H(disorder, center)
    r_band = np.full(model.n_species, 0.2)
    band = montecarlo.estimate_band_free_energy(
        fm, disorder, center, r_band, beta, max(n_samples // 4, 100), seed=seed
    )
    band_pred = montecarlo.band_prediction(fm, beta, r_band, h_center)
    dev = abs(band.estimate - band_pred)
    checks.append(CheckResult("band-free-energy", dev <= 0.05, dev, 0.05,
                              "r=0.2 against the conditional-mean prediction"))
    table.append({"beta": beta, "N": N, "estimate": band.estimate, "stderr": band.std_error,
                  "prediction": band_pred, "residual": band.estimate - band_pred})

    worst0 = 0.0
    residuals = []
    limit = beta * beta * xi1  # max f = 0 at beta <= beta_m
    for n_quad in (50, 100, 200):
        fmq = montecarlo.build_finite_model(model, n_quad)
        v0 = quadrature.log_E_Z2_exact(fmq, 0.0)
        worst0 = max(worst0, abs(v0))
        v = quadrature.log_E_Z2_exact(fmq, beta)
        residuals.append(v - limit)
        table.append({"beta": beta, "N": n_quad, "estimate": v, "stderr": 0.0,
                      "prediction": limit, "residual": v - limit})
    checks.append(CheckResult("second-moment-zero", worst0 <= 1e-8, worst0, 1e-8,
                              "log E Z^2 = 0 at beta=0, N in {50,100,200}"))
    mags = [abs(r) for r in residuals]
    shrinking = all(b < a for a, b in zip(mags, mags[1:]))
    checks.append(CheckResult("second-moment-shrinking", shrinking, mags[-1], mags[0],
                              f"|residual| over N in {{50,100,200}}: {mags}"))

    fe2 = montecarlo.estimate_free_energy(fm, disorder, beta, n_samples, seed=seed)
    checks.append(CheckResult("determinism", fe2.estimate == fe.estimate,
                              abs(fe2.estimate - fe.estimate), 0.0,
                              "identical seed reproduces the estimate bit for bit"))

    records = tuple(montecarlo.estimator_record(fm, res) for res in (fe, ls, band))
    return VerifyRun(tuple(checks), tuple(table), records)
