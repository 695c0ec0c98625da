"""Acceptance criteria, one printed PASS/FAIL line each.

Run under pytest, or directly with ``python3 tests/test_acceptance.py``.
"""
import os
import subprocess
import sys
import tempfile
import time

import pytest

from fusionlab.dual import TableFunctional, check_compat, probe_pairs
from fusionlab.instances import comm_alg_catalogue
from fusionlab.properties import DELTA_IDS, PURE_DELTA, build_context, verify_property
from fusionlab.tensor import (NoFactorization, algebra_tensor_oracle, check_isomorphic,
                              tensor_product, universal_check)
from fusionlab.vertex import Vec

COMM_INSTANCES = ["A2", "QZ2", "QxQ:e1"]
LEMMAS = ["LEMMA-CJ9", "LEMMA-92", "LEMMA-94", "LEMMA-98"]
ACTION_LAWS = [f"{f}-{k}" for f in "PQ" for k in ("IDENT", "DERIV", "COMM", "SL2", "LYCOMM")]

_contexts = {}


def ctx(name, cutoff=4):
    key = (name, cutoff)
    if key not in _contexts:
        _contexts[key] = build_context(name, cutoff=cutoff)
    return _contexts[key]


def _failed(reports):
    return [f"{r.id}@{r.context.get('instance')}" for r in reports if not r.passed]


def criterion_1():
    start = time.time()
    reports = []
    for pid in DELTA_IDS:
        if pid[len("DELTA-"):].lower() in PURE_DELTA:
            reports.append(verify_property(pid, ctx("heisenberg"), 6))
        else:
            for inst in ["heisenberg"] + COMM_INSTANCES:
                reports.append(verify_property(pid, ctx(inst), 4))
    for pid in LEMMAS:
        for inst in ["heisenberg"] + COMM_INSTANCES:
            reports.append(verify_property(pid, ctx(inst), 4))
    elapsed = time.time() - start
    bad = _failed(reports)
    ok = not bad and elapsed < 300
    return ok, f"{len(reports)} checks, {len(bad)} failed {bad[:4]}, {elapsed:.0f}s (limit 300s)"


def criterion_2():
    reports = [verify_property(pid, ctx(inst), 4)
               for pid in ACTION_LAWS for inst in ["heisenberg"] + COMM_INSTANCES]
    bad = _failed(reports)
    checked = sum(r.checked for r in reports)
    return not bad, f"{len(reports)} law/instance runs, {checked} coefficients, failed {bad}"


def criterion_3():
    c = ctx("heisenberg", cutoff=3)
    V = c.V
    gens = [Vec.basis(k) for k in V.basis_upto(2)]
    compat = [check_compat("P", lam, gens, 3, pairs=probe_pairs(V, V, 2)) for lam in c.compatible["P"]]
    jac = verify_property("P-JACOBI-ON-COMPAT", c, 3)
    q_alg = verify_property("Q-JACOBI-ON-COMPAT", ctx("A2"), 3)
    p_alg = verify_property("P-JACOBI-ON-COMPAT", ctx("A2"), 3)
    ok = all(r.passed for r in compat) and jac.passed and jac.checked > 0 and q_alg.passed and p_alg.passed
    return ok, (f"canonical compat {[r.passed for r in compat]}, Jacobi {jac.passed} ({jac.checked} coefficients), "
                f"balanced A2 Jacobi P {p_alg.passed} Q {q_alg.passed}")


def criterion_4():
    A2, mods = comm_alg_catalogue()["A2"]
    R = mods["regular"]
    lam = TableFunctional(R, R, {("s", "1"): 1}, label="unbalanced")
    jac = verify_property("COMMALG-JACOBI-ALWAYS", build_context("A2", lam=lam), 4)
    gens = [Vec.basis(v) for v in A2.names]
    wit = {}
    for fl in "PQ":
        rep = check_compat(fl, lam, gens, 4)
        w = rep.witnesses[0] if rep.witnesses else {}
        wit[fl] = (not rep.passed, w.get("v"), w.get("w1"), w.get("w2"))
    expected = (True, repr(Vec.basis("s")), "'1'", "'1'")
    ok = jac.passed and jac.checked > 0 and wit["P"] == expected and wit["Q"] == expected
    return ok, f"Jacobi {jac.passed}, compat P/Q fail with witnesses {wit}"


def criterion_5():
    reports = [verify_property(pid, ctx(inst), 4)
               for pid in ("P-STABLE", "Q-STABLE") for inst in ["heisenberg"] + COMM_INSTANCES]
    bad = _failed(reports)
    images = sum(r.notes.get("images", 0) for r in reports)
    ok = not bad and all(r.notes.get("images") for r in reports)
    return ok, f"{images} images re-checked, failed {bad}"


FUSION_PAIRS = [("A2", "regular", "regular"), ("A2", "regular", "quotient"), ("A2", "quotient", "quotient"),
                ("QZ2", "regular", "regular"), ("QZ2", "regular", "shifted"), ("QxQ", "e1", "e2"),
                ("QxQ", "regular", "e1"), ("Q", "regular", "regular")]


def criterion_6():
    cat = comm_alg_catalogue()
    rows, ok = [], True
    for alg, m1, m2 in FUSION_PAIRS:
        W1, W2 = cat[alg][1][m1], cat[alg][1][m2]
        oracle = algebra_tensor_oracle(W1, W2)
        for fl in "PQ":
            res = tensor_product(W1, W2, fl)
            iso, _, why = check_isomorphic(res, oracle)
            ok &= iso and len(res.subspace) == oracle.dimension
            rows.append(f"{alg}:{m1}x{m2}/{fl}={res.dimension}")
    A2, mods = cat["A2"]
    R = mods["regular"]
    res = tensor_product(R, R)
    own = {(a, b): res.box(a, b) for a, b in res.subspace.pairs}
    eta = universal_check(res, res.module, own).eta
    unique = eta == eta.eye(res.dimension)
    try:
        universal_check(res, R, {("s", "1"): Vec.basis("1")})
        rejected = False
    except NoFactorization:
        rejected = True
    ok &= unique and rejected
    return ok, f"{len(rows)} products iso to oracle, self-factorization identity {unique}, unbalanced rejected {rejected}"


def criterion_7():
    reports = [verify_property(pid, build_context(inst), 4)
               for pid in ("TAU-A-COMP-P", "TAU-A-COMP-Q") for inst in ("QZ2", "QZ2:shifted")]
    bad = _failed(reports)
    return not bad, f"{sum(r.checked for r in reports)} degree checks, failed {bad}"


FULL_SUITE = ["heisenberg"] + COMM_INSTANCES


def _full_suite_cmd(outdir):
    lines = ["from fusionlab.cli import main", "import sys", "codes = []"]
    for inst in FULL_SUITE:
        out = os.path.join(outdir, inst.replace(":", "_") + ".json")
        lines.append(f"codes.append(main(['check', '--suite', 'all', '--instance', {inst!r}, '--cutoff', '4', "
                     f"'--seed', '11', '--format', 'json', '--out', {out!r}]))")
    lines.append("sys.exit(max(codes))")
    return [sys.executable, "-c", "\n".join(lines)]


def criterion_8():
    start = time.time()
    with tempfile.TemporaryDirectory() as d1, tempfile.TemporaryDirectory() as d2:
        procs = [subprocess.Popen(_full_suite_cmd(d)) for d in (d1, d2)]
        codes = [p.wait(timeout=1800) for p in procs]
        elapsed = time.time() - start
        same = all(open(os.path.join(d1, f), "rb").read() == open(os.path.join(d2, f), "rb").read()
                   for f in sorted(os.listdir(d1)))
        files = len(os.listdir(d1))
    ok = codes == [0, 0] and same and files == len(FULL_SUITE) and elapsed < 900
    return ok, f"exit codes {codes}, {files} reports byte-identical {same}, {elapsed:.0f}s (limit 900s)"


CRITERIA = [
    (1, "delta-calculus suite", criterion_1),
    (2, "action-law suite", criterion_2),
    (3, "compatibility implies Jacobi", criterion_3),
    (4, "converse-failure witness over A2", criterion_4),
    (5, "stability under tau and L'", criterion_5),
    (6, "fusion against the algebraic oracle", criterion_6),
    (7, "group-degree compatibility", criterion_7),
    (8, "determinism and runtime", criterion_8),
]


def _line(num, name, ok, detail):
    return f"ACCEPTANCE {num} {'PASS' if ok else 'FAIL'}: {name}: {detail}"


@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"criterion-{n}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num, name, fn in CRITERIA:
        ok, detail = fn()
        print(_line(num, name, ok, detail), flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
