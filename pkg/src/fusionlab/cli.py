"""Command-line front end: property suites, tensor products and compatibility reports."""
import argparse
import ast
import json
import sys

from .dual import (CutoffExceeded, TableFunctional, ZeroFunctional, canonical_lambda, check_compat,
                   check_jacobi, closure_Wlambda, probe_pairs, random_functional)
from .instances import CommAlgebra, UnsupportedInstance, load_instance
from .properties import (ALL_IDS, DELTA_IDS, PROPERTY_IDS, UnknownProperty, build_context,
                         verify_property)
from .vertex import Vec

SCHEMA_VERSION = 1

SUITES = {
    "delta": DELTA_IDS,
    "actions": sorted(f"{f}-{k}" for f in "PQ" for k in ("IDENT", "DERIV", "COMM", "SL2", "LYCOMM")),
    "compat": sorted(["P-JACOBI-ON-COMPAT", "Q-JACOBI-ON-COMPAT", "P-STABLE", "Q-STABLE",
                      "COMMALG-JACOBI-ALWAYS"]),
    "lemmas": sorted(["LEMMA-92", "LEMMA-94", "LEMMA-98", "LEMMA-CJ9"]),
    "grading": sorted(["TAU-A-COMP-P", "TAU-A-COMP-Q", "SIGMA-ADJOINT"]),
    "properties": PROPERTY_IDS,
    "all": ALL_IDS,
}

# statuses that are reported but do not count as failures
NEUTRAL = ("precondition-unmet", "not-applicable")


class ConfigError(ValueError):
    pass


def _parse_key(text):
    try:
        val = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text
    return tuple(val) if isinstance(val, list) else val


def _json_key(k):
    return tuple(k) if isinstance(k, list) else k


def load_lambda_file(path, W1, W2):
    """JSON: {"values": [[w1, w2, value], ...]} with rational values as strings or ints."""
    from fractions import Fraction
    try:
        with open(path) as fh:
            data = json.load(fh)
        values = {}
        for a, b, c in data["values"]:
            values[(_json_key(a), _json_key(b))] = Fraction(c)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed lambda file {path}: {exc}") from exc
    known1, known2 = set(W1.basis_upto(W1.cutoff or 0)), set(W2.basis_upto(W2.cutoff or 0))
    for a, b in values:
        if a not in known1 or b not in known2:
            raise ConfigError(f"lambda file {path}: unknown basis pair ({a!r}, {b!r})")
    return TableFunctional(W1, W2, values, label=f"file[{path}]")


def make_lambda(spec, V, W, seed, probe_weight):
    """Parse a lambda spec into a functional on V (x) W (Heisenberg) or W (x) W (algebras)."""
    comm = isinstance(V, CommAlgebra)
    W1 = W if comm else V
    if spec is None:
        return None
    if spec == "zero":
        return ZeroFunctional(W1, W)
    head, _, rest = spec.partition(":")
    if head == "canonical":
        key, _, val = rest.partition("=")
        if key not in ("w'", "w"):
            raise ConfigError(f"bad canonical lambda spec {spec!r}; use canonical:w'=<basis name>")
        return canonical_lambda(W, _parse_key(val) if val else W.basis_of_weight(W.min_weight)[0])
    if head == "random":
        key, _, val = rest.partition("=")
        try:
            s = int(val) if key == "seed" else seed
        except ValueError as exc:
            raise ConfigError(f"bad random lambda spec {spec!r}") from exc
        top = W1.min_weight + W.min_weight + (0 if comm else probe_weight)
        return random_functional(W1, W, s, max_total=top)
    if head == "file":
        return load_lambda_file(rest, W1, W)
    return load_lambda_file(spec, W1, W)


def _config(args, **extra):
    out = {"instance": args.instance, "cutoff": args.cutoff, "window": args.window,
           "seed": args.seed, "lambda": args.lambda_spec, "flavor": args.flavor}
    out.update(extra)
    return out


def _emit(args, doc, text_lines):
    if args.format == "json":
        body = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    else:
        body = "\n".join(text_lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _validate(args):
    if args.window < 1:
        raise ConfigError("window radius must be at least 1")
    if args.cutoff < 0:
        raise ConfigError("cutoff must be nonnegative")


def _select_ids(args):
    if args.property:
        ids = []
        for pid in args.property:
            ids.extend(p.strip() for p in pid.split(",") if p.strip())
        for pid in ids:
            if pid not in ALL_IDS:
                raise ConfigError(f"unknown property id {pid!r}")
    else:
        if args.suite not in SUITES:
            raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}")
        ids = list(SUITES[args.suite])
    if args.flavor in ("P", "Q"):
        other = "Q" if args.flavor == "P" else "P"
        ids = [p for p in ids if not (p.startswith(other + "-") or p.endswith("-" + other))]
    return sorted(set(ids))


def cmd_check(args):
    _validate(args)
    ids = _select_ids(args)
    ctx = build_context(args.instance, cutoff=args.cutoff, seed=args.seed)
    lam = make_lambda(args.lambda_spec, ctx.V, ctx.W, args.seed, ctx.probe_weight)
    if lam is not None:
        ctx.extra = [lam]
    results, lines, failed = [], [], 0
    for pid in ids:
        rep = verify_property(pid, ctx, args.window)
        doc = rep.to_json()
        results.append({"id": doc["id"], "anchor": doc["anchor"], "window": doc["window"],
                        "pass": doc["pass"], "status": doc["status"], "checked": doc["checked"],
                        "context": doc["context"], "witnesses": doc["witnesses"]})
        bad = not rep.passed and rep.status not in NEUTRAL
        failed += bad
        lines.append(f"{doc['status'].upper():<19} {pid:<36} checked={rep.checked} window={doc['window']}")
        for w in rep.witnesses[:3]:
            lines.append(f"    witness: {json.dumps(w, sort_keys=True, default=str)}")
    lines.append(f"{len(ids)} properties, {failed} failed")
    doc = {"schemaVersion": SCHEMA_VERSION, "command": "check",
           "config": _config(args, properties=ids), "results": results}
    _emit(args, doc, lines)
    return 1 if failed else 0


def _module_arg(spec, default_instance):
    if ":" not in spec and default_instance and default_instance.lower() not in ("heisenberg", "f0", "fock"):
        spec = f"{default_instance}:{spec}"
    return load_instance(spec)[1]


def _matrix_json(M):
    return [[str(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]


def cmd_fuse(args):
    from .tensor import algebra_tensor_oracle, check_isomorphic, tensor_product, universal_check
    W1 = _module_arg(args.left, args.instance)
    W2 = _module_arg(args.right, args.instance)
    flavors = ["P", "Q"] if args.flavor in (None, "both") else [args.flavor]
    oracle = algebra_tensor_oracle(W1, W2)
    results, lines, failed = [], [], 0
    for fl in flavors:
        res = tensor_product(W1, W2, fl)
        ok, T, why = check_isomorphic(res, oracle)
        # the canonical map factors through itself
        selfmap = {(a, b): res.box(a, b) for a, b in res.subspace.pairs}
        eta = universal_check(res, res.module, selfmap).eta
        failed += not ok
        results.append({"flavor": fl, "compatible_dim": len(res.subspace), "dim": res.dimension,
                        "oracle_dim": oracle.dimension, "isomorphic": ok, "reason": why,
                        "intertwiner": _matrix_json(T) if T is not None else None,
                        "action": {v: _matrix_json(C) for v, C in sorted(res.matrices.items())},
                        "self_factorization": _matrix_json(eta),
                        "flags": res.subspace.flags})
        lines.append(f"{fl}: dim {res.dimension}, oracle {oracle.dimension}, "
                     f"isomorphic: {'yes' if ok else 'no'}")
    doc = {"schemaVersion": SCHEMA_VERSION, "command": "fuse",
           "config": {"left": W1.name, "right": W2.name, "flavors": flavors}, "results": results}
    _emit(args, doc, lines)
    return 1 if failed else 0


def cmd_compat(args):
    _validate(args)
    V, W = load_instance(args.instance, args.cutoff) if not args.instance.endswith(".json") else (None, None)
    if V is None:
        ctx = build_context(args.instance, cutoff=args.cutoff, seed=args.seed)
        V, W = ctx.V, ctx.W
    comm = isinstance(V, CommAlgebra)
    probe = 0 if comm else min(args.cutoff, 3)
    lam = make_lambda(args.lambda_spec or "random:seed=%d" % args.seed, V, W, args.seed, probe)
    gens = [Vec.basis(k) for k in (V.names if comm else V.basis_upto(min(args.cutoff, 2)))]
    pairs = probe_pairs(lam.W1, lam.W2, lam.W1.min_weight + lam.W2.min_weight + probe)
    # a functional is usually built for one flavor; P unless asked otherwise
    flavors = {None: ["P"], "both": ["P", "Q"]}.get(args.flavor, [args.flavor])
    results, lines, failed = [], [], 0
    for fl in flavors:
        rep = check_compat(fl, lam, gens, args.window, pairs=pairs)
        entry = {"flavor": fl, "compat": rep.passed, "compat_witnesses": [dict(w) for w in rep.witnesses],
                 "checked": rep.checked}
        line = f"{fl}: compat {'pass' if rep.passed else 'fail'}"
        if rep.passed:
            wits, checked = check_jacobi(fl, lam, gens, args.window, pairs)
            entry["jacobi"] = not wits
            entry["jacobi_witnesses"] = wits
            line += f", Jacobi {'pass' if not wits else 'fail'}"
            failed += bool(wits)
            try:
                basis, dims = closure_Wlambda(lam, fl, gens, args.cutoff, pairs, complete=comm)
                entry["closure"] = {f"{w},{d}": n for (w, d), n in sorted(dims.items(), key=str)}
                entry["grading_restriction"] = "finite within cutoff"
            except CutoffExceeded as exc:
                entry["closure"] = None
                entry["grading_restriction"] = f"undetermined: {exc}"
            line += f", closure {entry['closure'] or 'empty' if entry['closure'] is not None else 'n/a'}"
            line += f", grading restriction: {entry['grading_restriction']}"
        else:
            failed += 1
            w = rep.witnesses[0]
            if w.get("part") == "a":
                line += f", Y'(v, x)lambda not lower truncated: v={w['v']} nonzero at x^{w['exponent']}"
            else:
                line += (f", witness v={w['v']} w1={w['w1']} w2={w['w2']} "
                         f"at {w['exponents']}")
        results.append(entry)
        lines.append(line)
    doc = {"schemaVersion": SCHEMA_VERSION, "command": "compat",
           "config": _config(args, lambda_label=lam.label), "results": results}
    _emit(args, doc, lines)
    return 1 if failed else 0


def build_parser():
    p = argparse.ArgumentParser(prog="fusionlab", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", default="heisenberg",
                        help="heisenberg, A2, QZ2, QxQ, Q, '<algebra>:<module>' or a definition file")
    common.add_argument("--cutoff", type=int, default=4)
    common.add_argument("--window", type=int, default=4)
    common.add_argument("--lambda", dest="lambda_spec", default=None,
                        help="canonical:w'=<basis name>, random:seed=<n>, zero, or a JSON file")
    common.add_argument("--flavor", choices=["P", "Q", "both"], default=None)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None)
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="run property suites")
    c.add_argument("--suite", default="all", help=", ".join(sorted(SUITES)))
    c.add_argument("--property", action="append", default=None, help="property id(s), comma separated")
    c.set_defaults(func=cmd_check)
    f = sub.add_parser("fuse", parents=[common], help="tensor product of two modules")
    f.add_argument("left", help="module, e.g. A2:regular (or a module name with --instance)")
    f.add_argument("right")
    f.set_defaults(func=cmd_fuse)
    k = sub.add_parser("compat", parents=[common], help="compatibility report for one functional")
    k.set_defaults(func=cmd_compat)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ConfigError, UnknownProperty, UnsupportedInstance) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
