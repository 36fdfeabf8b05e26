"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Criterion 8 is split into its three clauses; the finite-size sign
clause (8c) fails by mathematical necessity and is kept as an honest red:
with the exactly normalized overlap density (required by clause 8a), Jensen's
inequality forces the finite-N second moment to sit strictly ABOVE its
large-N limit, so the gap cannot be negative.  See test_criterion_08c.
"""

import json
import math
import time

import numpy as np
import pytest

import spinmix as sm
from spinmix.cli import main as cli_main

from conftest import random_model
from oracles import (
    fd_gradient,
    fd_hessian,
    pure_beta_c_talagrand,
    pure_beta_m,
    rel_close,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def report(tag: str, ok: bool, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}")
    return ok


# ----------------------------------------------------------------------


def test_criterion_01_sk_anchor():
    t0 = time.perf_counter()
    model = sm.sk_model()
    b_m = sm.beta_m(model)
    rep = sm.verdict(model)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(b_m - 0.70710678) <= 1e-6
        and rep.verdict is sm.Verdict.EQUAL
        and rep.beta_c == rep.beta_m
        and elapsed < 1.0
    )
    assert report(
        "criterion 01 sk-anchor",
        ok,
        f"beta_m={b_m!r} verdict={rep.verdict.value} beta_c={rep.beta_c!r} [{elapsed:.2f}s]",
    )


def test_criterion_02_cross_oracle_agreement():
    t0 = time.perf_counter()
    model = sm.sk_model()
    gap = abs(sm.beta_c_talagrand(model) - sm.beta_m(model))
    elapsed = time.perf_counter() - t0
    ok = gap <= 1e-6 and elapsed < 1.0
    assert report(
        "criterion 02 cross-oracle", ok, f"|beta_c_tal - beta_m|={gap:.2e} [{elapsed:.2f}s]"
    )


def test_criterion_03_regular_case_strictness():
    t0 = time.perf_counter()
    ok = True
    details = []
    for p in (3, 4):
        model = sm.pure_model(p)
        rep = sm.verdict(model)
        b_m = rep.beta_m
        b_c = sm.beta_c_talagrand(model)
        gap = b_c - b_m
        # gap values certified against the independent tangency oracle
        oracle_gap = pure_beta_c_talagrand(p) - pure_beta_m(p)
        ok = ok and rep.verdict is sm.Verdict.STRICTLY_LESS
        ok = ok and gap > 1e-3
        ok = ok and abs(gap - oracle_gap) <= 1e-6
        details.append(f"p={p}: verdict={rep.verdict.value} gap={gap:.6f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 5.0
    assert report("criterion 03 regular-case", ok, "; ".join(details) + f" [{elapsed:.2f}s]")


def test_criterion_04_quadratic_multi_species():
    t0 = time.perf_counter()
    model = sm.two_species_quadratic_model()
    rep = sm.verdict(model)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(rep.beta_H - 1.0 / math.sqrt(6.0)) <= 1e-9
        and rep.verdict is sm.Verdict.EQUAL
        and abs(rep.beta_m - rep.beta_H) <= 1e-6
        and elapsed < 5.0
    )
    assert report(
        "criterion 04 quadratic-two-species",
        ok,
        f"beta_H={rep.beta_H!r} beta_m={rep.beta_m!r} verdict={rep.verdict.value} "
        f"[{elapsed:.2f}s]",
    )


def test_criterion_05_coefficient_law_certification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        model = random_model(rng, int(rng.integers(1, 3)), max_total=4)
        fm = sm.build_finite_model(model, int(rng.integers(3 * model.n_species, 31)))
        a = sm.sample_uniform(fm, rng)
        b = sm.sample_uniform(fm, rng)
        r1 = sm.covariance_exact(fm, a, b)  # raises beyond 1e-10 disagreement
        r2 = fm.N * float(model.mixture.eval(sm.overlap(fm, a, b)))
        worst = max(worst, abs(r1 - r2) / max(1.0, abs(r2)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 30.0
    assert report(
        "criterion 05 coefficient-law", ok, f"50 instances, worst rel err={worst:.2e} "
        f"[{elapsed:.2f}s]"
    )


def test_criterion_06_derivative_certification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    fixtures = [
        sm.sk_model(),
        sm.pure_model(3),
        sm.two_species_quadratic_model(),
        random_model(np.random.default_rng(5), 2),
    ]
    ok = True
    worst_fd = 0.0
    worst_h0 = 0.0
    for model in fixtures:
        S = model.n_species
        beta = float(rng.uniform(0.3, 1.1))
        for _ in range(100):
            x = rng.uniform(0.05, 0.85, size=S)
            g = model.mixture.grad(x)
            h = model.mixture.hessian(x)
            ok = ok and rel_close(fd_gradient(model.mixture.eval, x), g, 1e-6)
            ok = ok and rel_close(fd_hessian(model.mixture.eval, x), h, 1e-6)
            fun = lambda r: sm.f_beta(model, beta, r)
            ok = ok and rel_close(fd_gradient(fun, x), sm.f_grad(model, beta, x), 1e-6)
            ok = ok and rel_close(fd_hessian(fun, x), sm.f_hessian(model, beta, x), 1e-6)
        M = sm.hessian_at_zero(model, beta)
        H0 = sm.f_hessian(model, beta, np.zeros(S))
        worst_h0 = max(worst_h0, float(np.max(np.abs(M - H0))))
    ok = ok and worst_h0 <= 1e-12
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 5.0
    assert report(
        "criterion 06 derivatives",
        ok,
        f"4 fixtures x 100 points; |M - Hess f(0)|_max={worst_h0:.2e} [{elapsed:.2f}s]",
    )


def test_criterion_07_transform_certification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    ok = True
    worst_id = 0.0
    worst_eta = 0.0
    for trial in range(100):
        model = random_model(np.random.default_rng(1000 + trial % 7), int(rng.integers(1, 3)))
        m = model.mixture
        S = m.n_species
        r = rng.uniform(0.0, 0.9, size=S)
        x = rng.uniform(0.0, 1.0, size=S)
        lhs = m.tilde_transform(r).eval(x)
        rhs = m.eval((1.0 - r * r) * x + r * r) - m.eval(r * r)
        err = abs(lhs - rhs) / max(1.0, abs(rhs))
        worst_id = max(worst_id, err)
        ok = ok and err <= 1e-12
    for trial in range(20):
        model = random_model(np.random.default_rng(2000 + trial), int(rng.integers(1, 3)))
        m = model.mixture
        S = m.n_species
        x = rng.uniform(0.1, 0.9, size=S)
        z = rng.uniform(0.1, 0.9, size=S)
        base = m.tilde_transform(np.zeros(S)).eval(z)
        slope = lambda eps: (m.tilde_transform(np.sqrt(eps * x)).eval(z) - base) / eps
        extrap = 2.0 * slope(5e-5) - slope(1e-4)
        eta = m.eta_direction(x, z)
        err = abs(extrap - eta) / max(1.0, abs(eta))
        worst_eta = max(worst_eta, err)
        ok = ok and err <= 1e-4
        ok = ok and m.eta_direction(x, np.zeros(S)) == 0.0
        ok = ok and m.eta_direction(x, np.ones(S)) == 0.0
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 5.0
    assert report(
        "criterion 07 transform",
        ok,
        f"identity worst={worst_id:.2e}, slope worst={worst_eta:.2e} [{elapsed:.2f}s]",
    )


def _sk_residuals():
    model = sm.sk_model()
    limit = 0.25  # beta^2 xi(1) + max f at beta = 0.5 < beta_m
    out = []
    for N in (50, 100, 200, 400):
        fm = sm.build_finite_model(model, N)
        out.append((N, sm.log_E_Z2_exact(fm, 0.5) - limit))
    return out


def test_criterion_08a_second_moment_zero_at_beta0():
    t0 = time.perf_counter()
    model = sm.sk_model()
    worst = max(
        abs(sm.log_E_Z2_exact(sm.build_finite_model(model, N), 0.0))
        for N in (50, 100, 200, 400)
    )
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 60.0
    assert report("criterion 08a second-moment beta=0", ok,
                  f"worst |value|={worst:.2e} [{elapsed:.2f}s]")


def test_criterion_08b_second_moment_convergence():
    t0 = time.perf_counter()
    resid = _sk_residuals()
    mags = [abs(r) for _, r in resid]
    elapsed = time.perf_counter() - t0
    ok = all(b < a for a, b in zip(mags, mags[1:])) and mags[-1] <= 0.02 and elapsed < 60.0
    assert report(
        "criterion 08b second-moment convergence",
        ok,
        f"|residual| over N: {[f'{m:.5f}' for m in mags]} [{elapsed:.2f}s]",
    )


def test_criterion_08c_second_moment_residual_sign_as_specified():
    # Stated requirement: the residual value - (beta^2 xi(1) + max f) is
    # negative.  This cannot hold: with the normalized density p(r) checked
    # by 08a, Jensen gives
    #   (1/N) log int p(r) exp(N b^2 xi(r)) dr >= b^2 E[xi(r)] = b^2/N > 0,
    # so the exact finite-N value always exceeds the large-N limit.  The
    # assertion is kept as stated and fails; 08a/08b cover the attainable
    # clauses.
    resid = _sk_residuals()
    detail = ", ".join(f"N={n}: {r:+.5f}" for n, r in resid)
    ok = all(r < 0.0 for _, r in resid)
    report("criterion 08c second-moment residual sign (as specified)", ok, detail)
    assert ok, (
        "residual is provably positive for the exactly normalized density: " + detail
    )


def test_criterion_09_asymptotic_free_energy():
    t0 = time.perf_counter()
    model = sm.sk_model()
    beta = sm.beta_m(model) / 2.0
    target = 0.5 * beta * beta * model.xi1()
    fm = sm.build_finite_model(model, 60)
    disorder = sm.sample_disorder(fm, seed=7)
    fe = sm.estimate_free_energy(fm, disorder, beta, 100_000, seed=7)
    ls = sm.estimate_level_set(fm, disorder, beta, 0.05, 100_000, seed=7)
    elapsed = time.perf_counter() - t0
    fe_dev = abs(fe.estimate - target)
    ls_dev = abs(ls.estimate - (-target))
    ok = fe_dev <= 0.1 and ls_dev <= 0.15 and elapsed < 120.0
    assert report(
        "criterion 09 free-energy",
        ok,
        f"|F - b^2 xi(1)/2|={fe_dev:.4f} (<=0.1), level-set dev={ls_dev:.4f} (<=0.15), "
        f"hits={ls.n_hits} [{elapsed:.1f}s]",
    )


def test_criterion_10_nsd_below_threshold():
    t0 = time.perf_counter()
    fixtures = [
        sm.sk_model(),
        sm.pure_model(3),
        sm.two_species_quadratic_model(),
    ]
    ok = True
    details = []
    for model in fixtures:
        if not model.mixture.positive_off_origin():
            continue
        b_m = sm.beta_m(model)
        worst = max(
            sm.check_nsd(model, frac * b_m)[0] for frac in (0.25, 0.5, 0.75, 0.9)
        )
        ok = ok and worst < 0.0
        details.append(f"{model.species.names}: max eig={worst:.4f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 5.0
    assert report("criterion 10 nsd", ok, "; ".join(details) + f" [{elapsed:.2f}s]")


def test_criterion_11_verify_determinism(tmp_path):
    t0 = time.perf_counter()
    out1, out2 = tmp_path / "v1.json", tmp_path / "v2.json"
    args = ["verify", "--seed", "7", "--samples", "5000"]
    code1 = cli_main(args + ["--out", str(out1)])
    code2 = cli_main(args + ["--out", str(out2)])
    elapsed = time.perf_counter() - t0
    same_json = out1.read_bytes() == out2.read_bytes()
    same_csv = out1.with_suffix(".csv").read_bytes() == out2.with_suffix(".csv").read_bytes()
    all_passed = json.loads(out1.read_text())["all_passed"]
    ok = code1 == 0 and code2 == 0 and same_json and same_csv and all_passed and elapsed < 10.0
    assert report(
        "criterion 11 determinism",
        ok,
        f"json identical={same_json} csv identical={same_csv} exit=({code1},{code2}) "
        f"[{elapsed:.1f}s]",
    )
