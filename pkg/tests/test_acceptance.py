"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line (live, bypassing capture) and
enforces both correctness and its wall-clock budget.
"""

import json
import math
import os
import random
import subprocess
import sys
import time

from mcdsolve.dp import dp_leq, evaluate_term, kleene_solve
from mcdsolve.examples import build_uav_model, example_path
from mcdsolve.modellang import elaborate, parse, render
from mcdsolve.oracle import (
    brute_compose,
    brute_lfp,
    random_finite_poset,
    random_instance,
    random_ordered_uvaluation,
    random_term,
)
from mcdsolve.posets import product
from mcdsolve.relaxations import (
    inject_tolerance,
    relax_plus_uniform,
    relax_plus_vdc,
    relax_times_vdc,
    uid,
    vdc,
)
from mcdsolve.uncertainty import (
    evaluate_uncertain,
    solve_uncertain,
    udp_leq,
)

# criterion 3 audits the outputs produced while running criteria 1 and 2
_WELLFORMED = {"checked": 0, "violations": []}


def _report(capsys, num, name, ok, elapsed, budget):
    verdict = "PASS" if (ok and elapsed < budget) else "FAIL"
    with capsys.disabled():
        print(
            "acceptance %2d %-26s %s  (%.2fs, budget %gs)"
            % (num, name, verdict, elapsed, budget)
        )
    assert ok, "criterion %d (%s) failed" % (num, name)
    assert elapsed < budget, "criterion %d over budget: %.2fs" % (num, elapsed)


def _wf_audit(tag, udp, queries):
    for f in queries:
        _WELLFORMED["checked"] += 1
        if not udp.lower.evaluate(f).leq(udp.upper.evaluate(f)):
            _WELLFORMED["violations"].append((tag, f))


def test_criterion_1_oracle_equivalence(capsys):
    rng = random.Random(20260816)
    start = time.perf_counter()
    bad = []
    for i in range(200):
        inst = random_instance(rng, depth=4)
        dp = evaluate_term(inst.term, inst.valuation)
        udp = evaluate_uncertain(
            inst.term, {k: _degen(v) for k, v in inst.valuation.items()}
        )
        _wf_audit("suite1/%d" % i, udp, inst.queries)
        expected = brute_compose(inst)
        for f in inst.queries:
            if dp.evaluate(f).points != expected[f].points:
                bad.append((i, f))
    elapsed = time.perf_counter() - start
    _report(capsys, 1, "oracle equivalence", not bad, elapsed, 60.0)


def _degen(dp):
    from mcdsolve.uncertainty import degenerate

    return degenerate(dp)


def test_criterion_2_valuation_monotonicity(capsys):
    rng = random.Random(7070)
    start = time.perf_counter()
    bad = []
    for i in range(200):
        inst = random_instance(rng, depth=3)
        tight, wide = random_ordered_uvaluation(rng, inst.valuation)
        u_tight = evaluate_uncertain(inst.term, tight)
        u_wide = evaluate_uncertain(inst.term, wide)
        queries = u_tight.funsp.elements()
        _wf_audit("suite2/%d/tight" % i, u_tight, queries)
        _wf_audit("suite2/%d/wide" % i, u_wide, queries)
        if not udp_leq(u_tight, u_wide, fs=queries):
            bad.append(i)
    elapsed = time.perf_counter() - start
    _report(capsys, 2, "valuation monotonicity", not bad, elapsed, 60.0)


def test_criterion_3_well_formedness(capsys):
    # audited alongside criteria 1 and 2; this enforces the tally
    ok = _WELLFORMED["checked"] > 0 and not _WELLFORMED["violations"]
    _report(capsys, 3, "well-formedness", ok, 0.0, 1.0)


def test_criterion_4_kleene_vs_brute_lfp(capsys):
    rng = random.Random(31337)
    start = time.perf_counter()
    bad = []
    count = 0
    while count < 100:
        outer = random_finite_poset(rng, max_size=3)
        feedback = random_finite_poset(rng, max_size=5)
        funsp = product(outer, feedback)
        term, valuation = random_term(rng, funsp, feedback, 2, [])
        body = evaluate_term(term, valuation)
        count += 1
        for f1 in outer.elements():
            reference = brute_lfp(body, f1)
            report = kleene_solve(body, f1, keep_history=True)
            if not report.converged:
                bad.append(("no convergence", count, f1))
                continue
            if report.front.points != reference.points:
                bad.append(("mismatch", count, f1))
            for earlier, later in zip(report.history, report.history[1:]):
                if not earlier.leq(later):
                    bad.append(("not ascending", count, f1))
    elapsed = time.perf_counter() - start
    _report(capsys, 4, "kleene least fixed point", not bad, elapsed, 30.0)


def test_criterion_5_uid_chain(capsys):
    start = time.perf_counter()
    alphas = [2.0**-k for k in range(10, -1, -1)]  # 2^-10 .. 1, ascending
    grid = [j * 0.1 for j in range(64)]
    bad = []
    pairs = [
        (a, b) for ia, a in enumerate(alphas) for b in alphas[ia + 1 :]
    ]  # a < b
    for a, b in pairs:
        if not udp_leq(uid(a), uid(b), fs=grid):
            bad.append(("chain", a, b))
    for a in alphas:
        u = uid(a)
        gaps = []
        for f in grid:
            (lo,) = u.lower.evaluate(f).points
            (hi,) = u.upper.evaluate(f).points
            if lo == hi:  # f sits exactly on the alpha grid
                continue
            gaps.append(hi - lo)
        if not gaps or any(g != a for g in gaps):
            bad.append(("gap", a))
    elapsed = time.perf_counter() - start
    _report(capsys, 5, "uid tolerance chain", not bad, elapsed, 5.0)


def test_criterion_6_vdc_families(capsys):
    start = time.perf_counter()
    bad = []
    if vdc(5) != [0.0, 0.5, 0.25, 0.75, 0.125]:
        bad.append("vdc prefix")

    plus_grid = [j * 0.37 for j in range(32)]
    times_grid = [1.0 + j * (254.0 / 31.0) for j in range(32)]
    for n in range(1, 17):
        finer, coarser = relax_plus_vdc(n + 1), relax_plus_vdc(n)
        if not udp_leq(finer, coarser, fs=plus_grid):
            bad.append(("plus not descending", n))
        finer_t = relax_times_vdc(n + 1, 1.0, 16.0)
        coarser_t = relax_times_vdc(n, 1.0, 16.0)
        if not udp_leq(finer_t, coarser_t, fs=times_grid):
            bad.append(("times not descending", n))

    # sandwich: lower <= exact <= upper at every sampled point
    for n in (1, 3, 8):
        u = relax_plus_vdc(n)
        for f in plus_grid:
            lo = u.lower.evaluate(f)
            hi = u.upper.evaluate(f)
            for k in range(9):
                exact = (f * k / 8.0, f * (8 - k) / 8.0)
                if not lo.up_contains(exact):
                    bad.append(("plus lower misses exact", n, f, k))
            for r1, r2 in hi.points:
                if r1 + r2 < f * (1 - 1e-12):  # samples sit on r1+r2 = f
                    bad.append(("plus upper infeasible", n, f))
        ut = relax_times_vdc(n, 1.0, 16.0)
        for f in times_grid:
            lo = ut.lower.evaluate(f)
            hi = ut.upper.evaluate(f)
            for k in range(9):
                r1 = 16.0 ** (k / 8.0)
                r2 = f / r1
                if 1.0 <= r2 <= 16.0 and not lo.up_contains((r1, r2)):
                    bad.append(("times lower misses exact", n, f, k))
            for r1, r2 in hi.points:
                if r1 * r2 < f * (1 - 1e-12):
                    bad.append(("times upper infeasible", n, f))
    elapsed = time.perf_counter() - start
    _report(capsys, 6, "vdc descending chain", not bad, elapsed, 10.0)


def test_criterion_7_uniform_witness(capsys):
    start = time.perf_counter()
    bad = []
    # the pinned counterexample: going from 2 to 3 uniform samples does
    # NOT tighten the relaxation at f = 1.0
    if udp_leq(relax_plus_uniform(3), relax_plus_uniform(2), fs=[1.0]):
        bad.append("pinned witness no longer fails containment")
    # the witness is not an isolated fluke: some n <= 4 must break too
    found = any(
        not udp_leq(relax_plus_uniform(n + 1), relax_plus_uniform(n), fs=[1.0])
        for n in range(1, 5)
    )
    if not found:
        bad.append("no witness among n<=4")
    elapsed = time.perf_counter() - start
    _report(capsys, 7, "uniform non-monotonicity", not bad, elapsed, 1.0)


def test_criterion_8_uav_behavior(capsys):
    start = time.perf_counter()
    bad = []
    base = {"distance": 20.0, "payload": 300.0, "missions": 200}
    grid = [i * 0.25 for i in range(1, 17)]
    indeterminate = {}
    for pct in (5, 10, 25):
        model, diags = elaborate(build_uav_model(pct))
        if model is None:
            bad.append(("elaborate", pct, [d.message for d in diags]))
            continue
        marked = set()
        for e in grid:
            f = model.build_query(dict(base, endurance=e))
            sol = solve_uncertain(model.term, model.uvaluation, f)
            if not sol.converged:
                bad.append(("no convergence", pct, e))
            if not sol.lower.front.leq(sol.upper.front):
                bad.append(("lower above upper", pct, e))
            if sol.verdict == "indeterminate":
                marked.add(e)
        indeterminate[pct] = marked
    if not bad:
        if not (indeterminate[5] <= indeterminate[10] <= indeterminate[25]):
            bad.append(("indeterminate set not nested", indeterminate))
        if not (len(indeterminate[5]) >= 1 and len(indeterminate[25]) > len(indeterminate[5])):
            bad.append(("indeterminate set did not grow", indeterminate))

    # tolerance sweep: intervals nest and contain the exact run
    model, _ = elaborate(build_uav_model(10))
    f = model.build_query(dict(base, endurance=1.5))
    exact = solve_uncertain(model.term, model.uvaluation, f)
    previous = None
    for alpha in (4.0, 2.0, 1.0, 0.5):
        uval = inject_tolerance(model.uvaluation, "actuation", alpha)
        sol = solve_uncertain(model.term, uval, f)
        lo, hi = sol.lower.front, sol.upper.front
        if not (lo.leq(exact.lower.front) and exact.upper.front.leq(hi)):
            bad.append(("alpha interval misses exact", alpha))
        if previous is not None:
            prev_lo, prev_hi = previous
            if not (prev_lo.leq(lo) and hi.leq(prev_hi)):
                bad.append(("alpha intervals not nested", alpha))
        previous = (lo, hi)
    elapsed = time.perf_counter() - start
    _report(capsys, 8, "uav uncertainty behavior", not bad, elapsed, 120.0)


def test_criterion_9_byte_determinism(capsys):
    start = time.perf_counter()

    def run(args, seed):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        return subprocess.run(
            [sys.executable, "-m", "mcdsolve.cli", *args],
            capture_output=True,
            env=env,
        )

    meter = str(example_path("energy_meter"))
    split = str(example_path("power_split"))
    jobs = [
        ["solve", meter, "--f", "power=8.1"],
        ["solve", split, "--f", "demand=6", "--format", "csv"],
        ["sweep", split, "--axis", "demand", "--from", "0", "--to", "8",
         "--steps", "7", "--format", "csv"],
        ["sweep", split, "--relax-n", "split=1,2,4", "--f", "demand=6"],
    ]
    bad = []
    for args in jobs:
        first = run(args, "0")
        second = run(args, "12345")
        if first.stdout != second.stdout or first.returncode != second.returncode:
            bad.append(args)
    elapsed = time.perf_counter() - start
    _report(capsys, 9, "byte determinism", not bad, elapsed, 60.0)


def test_criterion_10_parser_round_trip(capsys):
    start = time.perf_counter()
    bad = []
    for name in ("uav", "energy_meter", "power_split"):
        text = example_path(name).read_text(encoding="utf-8")
        one = parse(text)
        if not one.ok:
            bad.append((name, "did not parse"))
            continue
        two = parse(render(one.document))
        if not two.ok or two.document != one.document:
            bad.append((name, "round trip broke"))

    diagnostic_cases = [
        "poset x = R+[g]\nposet x = R+[g]\n",
        "dp a = wigget F(f[W]) R(r[g])\n",
        "dp a = identity R(x[W])\ndp b = identity R(y[g])\nterm series(a, b)\n",
        "term loop(",
        "dp a = catalogue F(f[W]) R(r[g]) { 1.0 -> }\n",
    ]
    for case in diagnostic_cases:
        result = parse(case)
        diags = list(result.diagnostics)
        if result.ok:
            model, ediags = elaborate(result.document)
            diags = ediags if model is None else []
        if not diags:
            bad.append(("expected a diagnostic", case))
        for d in diags:
            if d.span.line < 1 or d.span.col < 1:
                bad.append(("bad span", case))

    uav_text = example_path("uav").read_text(encoding="utf-8")
    for cut in range(0, len(uav_text), 997):
        parse(uav_text[:cut])  # must not raise
    for junk in ("", "((((", "}" * 40, "dp dp dp", "term term",
                 "\x00\x01", "poset = chain {,}", "uncertain u = pm(x, %)"):
        parse(junk)  # must not raise
    elapsed = time.perf_counter() - start
    _report(capsys, 10, "parser round trip", not bad, elapsed, 5.0)
