"""Batch command line: ``cliquelab <command> [flags]`` or ``cliquelab run --config cfg.json``.

Every run appends one JSON line (a run record) to ``--out`` when given and
prints the structured result. Exit codes: 0 pass, 2 property failure,
1 error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .approx import CompressionParams, Approximator, approximate_circuit, closure, estimate_step_errors
from .circuits import parse_circuit, serialize_circuit
from .distinguisher import DistinguisherParams, build_distinguisher, measure_success, plan_distinguisher
from .distributions import NegDistParams, PosDistParams, sample_negative, sample_positive
from .errors import CliqueLabError
from .graphs import members
from .processes import (
    CellDistribution,
    Lifting,
    left_lifting,
    link_lifting,
    random_proper_lifting,
    square_lifting,
    verify_comparison_chain,
)
from .seeding import SeedSpec
from .sunflowers import (
    SetFamily,
    check_robust,
    erdos_rado_bound,
    find_k_sunflower,
    parse_family,
    random_uniform_family,
    verify_erdos_rado,
    verify_rs_implies_rcs,
    verify_sunflower_is_rcs,
)

COMMANDS = (
    "sample", "build-distinguisher", "measure-success", "check-robust", "find-sunflower",
    "closure", "approximate", "compare-processes", "verify-lemma",
)

_num = {"type": ["number", "string"]}
_int = {"type": "integer"}
_family = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 1}}}

PARAM_SCHEMAS = {
    "sample": ({"dist": {"enum": ["negative", "positive"]}, "n": _int, "alpha": _int, "beta": _int, "p": _num,
                "count": _int}, ["dist", "n"]),
    "build-distinguisher": ({"n": _int, "alpha": _int, "beta": _int, "delta": _num, "K": _num,
                             "circuit_out": {"type": "string"}}, ["n", "alpha", "beta"]),
    "measure-success": ({"n": _int, "alpha": _int, "beta": _int, "delta": _num, "K": _num, "trials": _int,
                         "ell": _int, "m": _int, "tau": _int}, ["n", "alpha", "beta"]),
    "check-robust": ({"n": _int, "family": _family, "family_path": {"type": "string"}, "core": _family["items"],
                      "p": _num, "eps": _num, "kind": {"enum": ["set", "clique"]},
                      "mode": {"enum": ["exact", "mc"]}, "trials": _int}, ["p", "eps"]),
    "find-sunflower": ({"n": _int, "family": _family, "family_path": {"type": "string"}, "k": _int}, ["k"]),
    "closure": ({"n": _int, "family": _family, "family_path": {"type": "string"}, "p": _num, "eps": _num,
                 "c": _int}, ["p", "eps"]),
    "approximate": ({"circuit_path": {"type": "string"}, "p": _num, "eps": _num, "c": _int, "beta": _int,
                     "alpha": _int, "trials": _int, "mode": {"enum": ["exact", "mc"]},
                     "trace_out": {"type": "string"}}, ["circuit_path"]),
    "compare-processes": ({"n": _int, "family": _family, "family_path": {"type": "string"}, "ell": _int,
                           "lifting": {"type": "string"}, "p": _num, "core": _family["items"]},
                          ["ell", "lifting", "p"]),
    "verify-lemma": ({"lemma": {"enum": ["sunflower-rcs", "rs-rcs", "erdos-rado", "comparison"]},
                      "n": _int, "ell": _int, "k": _int, "c": _int, "p": _num, "eps": _num,
                      "samples": _int, "families": _int}, ["lemma"]),
}


def config_schema(command: str) -> dict:
    props, required = PARAM_SCHEMAS[command]
    return {
        "type": "object",
        "properties": {
            "command": {"enum": list(COMMANDS)},
            "params": {"type": "object", "properties": props, "required": required},
            "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            "output_path": {"type": ["string", "null"]},
        },
        "required": ["command", "params"],
    }


class UsageError(CliqueLabError):
    pass


def validate_config(config: dict) -> None:
    cmd = config.get("command") if isinstance(config, dict) else None
    if cmd not in COMMANDS:
        raise UsageError(f"config.command: must be one of {', '.join(COMMANDS)}")
    try:
        jsonschema.validate(config, config_schema(cmd))
    except jsonschema.ValidationError as exc:
        path = ".".join(["config", *map(str, exc.absolute_path)])
        msg = exc.message
        if exc.validator == "required":
            missing = msg.split("'")[1]
            path, msg = f"{path}.{missing}", "required field is missing"
        raise UsageError(f"{path}: {msg}") from None


def _q(x):
    """Parse a probability exactly: '1/4', '0.25' and 0.25 all give Fraction(1, 4)."""
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    return x


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _family_from(params) -> SetFamily:
    if "family_path" in params:
        return parse_family(Path(params["family_path"]).read_text())
    if "family" not in params or "n" not in params:
        raise UsageError("config.params.family: give 'family' with 'n', or 'family_path'")
    return SetFamily(params["n"], [[v - 1 for v in s] for s in params["family"]])


def _sets(masks):
    return [[v + 1 for v in members(m)] for m in masks]


# ------------------------------------------------------------- commands

def cmd_sample(params, seed):
    count = params.get("count", 1)
    if params["dist"] == "negative":
        dist = NegDistParams(params["n"], params.get("alpha"), _q(params["p"]) if "p" in params else None)
        graphs = [sample_negative(dist, seed, i) for i in range(count)]
    else:
        dist = PosDistParams(params["n"], params["beta"])
        graphs = [sample_positive(dist, seed, i) for i in range(count)]
    return {"graphs": [g.to_text() for g in graphs], "edge_counts": [g.edge_count for g in graphs]}, True


def _dparams(params, seed) -> DistinguisherParams:
    if all(k in params for k in ("ell", "m", "tau")):
        return DistinguisherParams(params["n"], params["alpha"], params["beta"], params["ell"], params["m"],
                                   params["tau"], seed)
    return plan_distinguisher(params["n"], params["alpha"], params["beta"], float(params.get("delta", 0.1)),
                              float(params.get("K", 8)), seed)


def cmd_build_distinguisher(params, seed):
    dp = _dparams(params, seed)
    circuit = build_distinguisher(dp)
    text = serialize_circuit(circuit)
    if "circuit_out" in params:
        Path(params["circuit_out"]).write_text(text)
    return {
        "ell": dp.ell, "m": dp.m, "tau": dp.tau, "circuit_size": circuit.size, "gates": len(circuit),
        "certificate": dp.certificate, "sha256": hashlib.sha256(text.encode()).hexdigest(),
    }, True


def cmd_measure_success(params, seed):
    rep = measure_success(_dparams(params, seed), params.get("trials", 1000))
    return rep.to_dict(), rep.passed


def cmd_check_robust(params, seed):
    fam = _family_from(params)
    core = [v - 1 for v in params["core"]] if "core" in params else None
    v = check_robust(fam, core, _q(params["p"]), _q(params["eps"]), params.get("kind", "clique"),
                     params.get("mode", "exact"), params.get("trials", 10_000), seed)
    return {"kind": v.kind, "mode": v.mode, "probability": v.probability.value,
            "half_width": v.probability.half_width, "threshold": v.threshold, "verdict": v.verdict}, v.passed


def cmd_find_sunflower(params, seed):
    fam = _family_from(params)
    w = find_k_sunflower(fam, params["k"])
    if w is None:
        return {"found": False}, False
    return {"found": True, "petals": _sets([fam.masks[i] for i in w.petal_indices]),
            "core": sorted(v + 1 for v in w.core)}, True


def cmd_closure(params, seed):
    fam = _family_from(params)
    closed, log = closure(Approximator.from_family(fam), _q(params["p"]), _q(params["eps"]),
                          seed=seed.master_seed)
    result = closed
    if "c" in params:
        from .approx import trim

        result = trim(closed, params["c"])
    return {"closed": _sets(closed.sorted_terms()), "result": _sets(result.sorted_terms()),
            "replacements": [{"core": [v + 1 for v in members(r.core)], "subfamily": _sets(r.subfamily),
                              "coverage": r.coverage.value} for r in log]}, True


def cmd_approximate(params, seed):
    circuit = parse_circuit(Path(params["circuit_path"]).read_text())
    cp = None
    if "p" in params:
        cp = CompressionParams(_q(params["p"]), _q(params["eps"]), params.get("c", 2), seed=seed.master_seed)
    approx, trace = approximate_circuit(circuit, cp)
    if "trace_out" in params:
        Path(params["trace_out"]).write_text(trace.to_json_lines())
    out = {"approximator": _sets(approx.sorted_terms()), "replacements": trace.replacement_count}
    if "beta" in params and "alpha" in params:
        errs = estimate_step_errors(
            trace, circuit, (NegDistParams(circuit.n_vertices, params["alpha"]),
                             PosDistParams(circuit.n_vertices, params["beta"])),
            params.get("trials", 2000), seed, params.get("mode", "mc"))
        out["step_errors"] = [e.to_dict() for e in errs]
    return out, True


def _lifting(params, fam, seed) -> Lifting:
    name, ell = params["lifting"], params["ell"]
    if name == "left":
        return left_lifting(fam, ell)
    if name == "square":
        return square_lifting(fam, ell)
    if name == "link":
        return link_lifting(fam, [v - 1 for v in params.get("core", [])])
    if name == "random":
        return random_proper_lifting(fam, ell, seed.rng(0))
    return Lifting.from_json(Path(name).read_text())


def cmd_compare_processes(params, seed):
    fam = _family_from(params)
    rep = verify_comparison_chain(_lifting(params, fam, seed), CellDistribution.bernoulli(_q(params["p"])))
    return {"chain": rep.values, "lhs": rep.lhs, "rhs": rep.rhs, "non_decreasing": rep.non_decreasing,
            "comparison_holds": rep.comparison_holds}, rep.ok


def cmd_verify_lemma(params, seed):
    lemma = params["lemma"]
    if lemma == "sunflower-rcs":
        r = verify_sunflower_is_rcs(params.get("ell", 2), params.get("k", 2), params.get("c", 0),
                                    _q(params.get("p", "1/2")))
        return {"failure": r.failure, "closed_form": r.closed_form, "bound": r.bound}, r.ok
    if lemma == "rs-rcs":
        r = verify_rs_implies_rcs(params.get("samples", 100), params.get("n", 8), params.get("ell", 2),
                                  _q(params.get("p", "7/10")), _q(params.get("eps", "3/10")), seed)
        return {"premise_count": r.premise_count, "attempts": r.attempts, "skipped": r.skipped,
                "counterexamples": [_sets(f.masks) for f in r.counterexamples]}, r.ok
    if lemma == "erdos-rado":
        ell, k, n = params.get("ell", 2), params.get("k", 3), params.get("n", 10)
        size = erdos_rado_bound(ell, k)
        fams = (random_uniform_family(n, ell, size, seed.rng(i)) for i in range(params.get("families", 1000)))
        r = verify_erdos_rado(ell, k, fams)
        return {"bound": r.bound, "checked": r.checked, "failures": len(r.failures)}, r.ok
    fam = _family_from(params)
    rep = verify_comparison_chain(_lifting({"lifting": "random", **params}, fam, seed),
                                  CellDistribution.bernoulli(_q(params.get("p", "1/2"))))
    return {"chain": rep.values, "ok": rep.ok}, rep.ok


HANDLERS = {
    "sample": cmd_sample,
    "build-distinguisher": cmd_build_distinguisher,
    "measure-success": cmd_measure_success,
    "check-robust": cmd_check_robust,
    "find-sunflower": cmd_find_sunflower,
    "closure": cmd_closure,
    "approximate": cmd_approximate,
    "compare-processes": cmd_compare_processes,
    "verify-lemma": cmd_verify_lemma,
}


@dataclass
class RunRecord:
    config_hash: str
    started: float
    finished: float
    seed: int
    command: str
    result: dict
    passed: bool
    version: str = __version__

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 2

    def to_dict(self) -> dict:
        return {"config_hash": self.config_hash, "started": self.started, "finished": self.finished,
                "seed": self.seed, "command": self.command, "result": self.result, "pass": self.passed,
                "version": self.version}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def config_hash(config: dict) -> str:
    core = {k: config.get(k) for k in ("command", "params", "master_seed")}
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


def run(config: dict) -> RunRecord:
    validate_config(config)
    seed = SeedSpec(config.get("master_seed", 0))
    started = time.time()
    result, passed = HANDLERS[config["command"]](config["params"], seed)
    rec = RunRecord(config_hash(config), started, time.time(), seed.master_seed, config["command"],
                    _jsonable(result), bool(passed))
    out = config.get("output_path")
    if out:
        with open(out, "a") as fh:
            fh.write(rec.to_json() + "\n")
    return rec


# ------------------------------------------------------------- report

def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif not isinstance(obj, list):
        out[prefix] = obj


LEAD = ["config_hash", "command", "seed", "pass"]


def load_records(path) -> tuple[list[dict], int]:
    """Records from a JSON-lines log, plus the number of corrupt lines skipped."""
    recs, bad = [], 0
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict) or "result" not in obj or "command" not in obj:
                raise ValueError
            recs.append(obj)
        except ValueError:
            bad += 1
    return recs, bad


def report(path, fmt: str = "csv") -> tuple[str, int]:
    recs, bad = load_records(path)
    rows = []
    for r in recs:
        row = {k: r.get(k) for k in LEAD}
        flat: dict = {}
        _flatten("", r["result"], flat)
        row.update({f"result.{k}": v for k, v in flat.items()})
        rows.append(row)
    cols = LEAD + sorted({k for row in rows for k in row} - set(LEAD)) if rows else []
    if fmt == "json":
        return json.dumps([{c: row.get(c) for c in cols} for row in rows], indent=1), bad
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({c: row.get(c, "") for c in cols})
    return buf.getvalue(), bad


# ------------------------------------------------------------- argparse

FLAG_KEYS = ("n", "alpha", "beta", "p", "eps", "c", "trials", "k", "ell", "m", "tau", "delta", "K", "count",
             "samples", "families")


class _Parser(argparse.ArgumentParser):
    # usage errors are errors (exit 1); exit 2 is reserved for property failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cliquelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    rp = sub.add_parser("report", help="flatten a run log into a table")
    rp.add_argument("records")
    rp.add_argument("--format", choices=["csv", "json"], default="csv")
    rp.add_argument("--out")
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        for key in FLAG_KEYS:
            s.add_argument(f"--{key}")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--mode", choices=["exact", "mc"])
        s.add_argument("--out")
        s.add_argument("--dist", choices=["negative", "positive"])
        s.add_argument("--kind", choices=["set", "clique"])
        s.add_argument("--family", dest="family_path")
        s.add_argument("--circuit", dest="circuit_path")
        s.add_argument("--circuit-out", dest="circuit_out")
        s.add_argument("--trace-out", dest="trace_out")
        s.add_argument("--lifting")
        s.add_argument("--lemma")
        s.add_argument("--core", help="comma-separated 1-based vertices")
    return ap


def _coerce(v: str):
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def config_from_args(args) -> dict:
    if args.config:
        config = json.loads(Path(args.config).read_text())
        if args.command != "run":
            config.setdefault("command", args.command)
    else:
        params = {}
        for key in FLAG_KEYS:
            v = getattr(args, key, None)
            if v is not None:
                params[key] = _coerce(v)
        for key in ("mode", "dist", "kind", "family_path", "circuit_path", "circuit_out", "trace_out",
                    "lifting", "lemma"):
            v = getattr(args, key, None)
            if v is not None:
                params[key] = v
        if getattr(args, "core", None):
            params["core"] = [int(x) for x in args.core.split(",")]
        config = {"command": args.command, "params": params, "master_seed": args.seed}
    if args.out:
        config["output_path"] = args.out
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            text, bad = report(args.records, args.format)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            if bad:
                print(f"skipped {bad} corrupt record(s)", file=sys.stderr)
            return 0
        rec = run(config_from_args(args))
    except (CliqueLabError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(rec.result, sort_keys=True))
    return rec.exit_code


if __name__ == "__main__":
    sys.exit(main())
