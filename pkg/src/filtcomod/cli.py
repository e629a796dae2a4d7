"""Command-line front end.  JSON is the output contract; ``--pretty`` prints tables."""

from __future__ import annotations

import argparse
import json
import sys
from math import comb
from pathlib import Path

import jsonschema
import numpy as np

from . import checks
from .coalgebra import SubspaceInAmbient, filtration_coalgebra, generated_subcoalgebra
from .comodule import (Comodule, GaOperatorModule, comodule_from_json, comodule_from_operators,
                       socle_invariants, trivial_comodule)
from .errors import ArtifactError, CapOverflowError, ValidationError
from .frobsupport import ga_injectivity_verdict, mock_injectivity_verdict
from .exactla import get_field
from .growth import cofinite_check, dimension_sequence, fit_cofinite_type
from .hopfmodels import make_model
from .mockinj import ModuleFamily, family_from_json, hom_vanishing_probe

MODEL_KINDS = {"ga": "Ga", "un": "UN", "gln": "GLN"}
FAMILIES = ("regular", "lang_ga", "lang_un", "primitives", "trivial", "countable_trivial",
            "quotient", "twist_sum")


# sources --------------------------------------------------------------------------

def _load_json(text):
    """Inline JSON, or a path (optionally prefixed with @) to a JSON file."""
    if text is None:
        return None
    s = text.strip()
    if s.startswith("@"):
        s = s[1:]
    elif s[:1] in "{[":
        return json.loads(s)
    try:
        return json.loads(Path(s).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {s}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad JSON in {s}: {exc}") from None


def build_model(args, cap=None):
    kind = MODEL_KINDS[args.model]
    F = get_field(args.p, args.field_ext)
    if cap is None:
        cap = args.cap if args.cap is not None else (args.dmax if args.dmax is not None else 1)
    N = None if kind == "Ga" else (args.N if args.N is not None else 2)
    return make_model(kind, F, cap, N=N)


def build_family(args):
    if args.family_json is not None:
        return family_from_json(_load_json(args.family_json))
    name = args.family
    if name is None:
        raise ValidationError("a module source is required (--family, --family-json or --module)")
    obj = {"kind": name, "p": args.p}
    if name == "lang_ga":
        obj["d"] = args.d if args.d is not None else 1
    elif name == "lang_un":
        obj.update({"N": args.N or 3, "r": args.r if args.r is not None else 1})
    elif name == "quotient":
        obj = {"kind": "quotient",
               "of": {"kind": "regular", "model": "Ga", "p": args.p},
               "by": {"kind": "lang_ga", "p": args.p, "d": args.d if args.d is not None else 1}}
    elif name == "twist_sum":
        obj["N"] = args.N or 2
    elif name in ("regular", "trivial", "countable_trivial"):
        obj["model"] = MODEL_KINDS[args.model]
        if obj["model"] != "Ga":
            obj["N"] = args.N or 2
        if args.field_ext > 1:
            obj["field"] = [args.p, args.field_ext]
    return family_from_json(obj)


def load_module(args):
    obj = _load_json(args.module)
    if obj is None:
        return None
    if set(obj) <= {"p", "psi", "dim"} and "psi" in obj:
        op = GaOperatorModule.from_json(obj)
        D = args.cap if args.cap is not None else op.p ** max(len(op.psi), 1) - 1
        return comodule_from_operators(op, D)
    return comodule_from_json(obj)


class ComoduleFamily(ModuleFamily):
    """A single finite comodule viewed as a (constant) family."""

    kind = "module"
    inside_regular = False

    def __init__(self, M: Comodule):
        super().__init__(M.model)
        self.M = M

    def piece(self, D):
        return self.M

    def stable_piece(self, d):
        return self.M

    def truncation(self, n):
        return self.M

    def params(self):
        return {"dim": self.M.dim}


def _family_or_module(args):
    M = load_module(args)
    return ComoduleFamily(M) if M is not None else build_family(args)


# commands -------------------------------------------------------------------------

def cmd_filtration_dims(args):
    if args.dmax is None:
        raise ValidationError("--dmax is required")
    m = build_model(args)
    rows = []
    for d in range(args.dmax + 1):
        if d > m.cap:
            raise CapOverflowError(f"degree {d} exceeds cap {m.cap}")
        row = {"d": d, "dim": m.dim(d)}
        if m.kind == "GLN":
            N2 = m.N * m.N
            row["lower"] = comb(d + N2, N2)
            row["upper"] = sum(comb(d - i * m.N + N2, N2) for i in range(d // m.N + 1))
        rows.append(row)
    return {"command": "filtration-dims", "model": m.describe(), "rows": rows}


def cmd_cofinite_type(args):
    fam = _family_or_module(args)
    dmax = args.dmax if args.dmax is not None else 40
    dims = dimension_sequence(fam.M if isinstance(fam, ComoduleFamily) else fam, dmax)
    prof = fit_cofinite_type(dims)
    if args.format == "csv":
        return prof.to_csv()
    return {"command": "cofinite-type", "family": fam.to_json(), "profile": prof.to_json()}


def cmd_cofinite_check(args):
    fam = build_family(args)
    dmax = args.dmax if args.dmax is not None else 4
    return {"command": "cofinite-check", "family": fam.to_json(), "perDegree": cofinite_check(fam, dmax)}


def cmd_verdicts(args):
    fam = _family_or_module(args)
    rmax = args.rmax if args.rmax is not None else 2
    mock = mock_injectivity_verdict(fam, rmax, blocks=args.blocks, seed=args.seed).to_json()
    out = {"command": "verdicts", "family": fam.to_json(), "mock": mock}
    if fam.model.kind == "Ga":
        out["injective"] = ga_injectivity_verdict(fam, rmax, seed=args.seed).to_json()
    return out


def cmd_socle(args):
    M = load_module(args)
    if M is None:
        fam = build_family(args)
        M = fam.piece(args.cap if args.cap is not None else 8)
    S = socle_invariants(M)
    return {"command": "socle", "moduleDim": M.dim, "dim": S.dim,
            "basis": S.basis.tolist()}


def _parse_element(model, item):
    if isinstance(item, dict):
        return model.from_json(item)
    s = str(item).strip()
    if s == "1":
        return model.one()
    return model.var(s)


def cmd_subcoalgebra(args):
    m = build_model(args, cap=args.d if args.d is not None else args.cap)
    d = args.d if args.d is not None else m.cap
    C = filtration_coalgebra(m, d)
    items = _load_json(args.elements) if args.elements else ["1"]
    if not isinstance(items, list):
        raise ValidationError("--elements must be a JSON list")
    X = np.stack([m.coords(_parse_element(m, it), d) for it in items])
    W = generated_subcoalgebra(C, SubspaceInAmbient.span(X, m.F, C.dim))
    return {"command": "subcoalgebra", "model": m.describe(), "degree": d,
            "ambientDim": C.dim, "dim": W.dim, "basis": W.basis.tolist(),
            "elements": [m.to_json(m.from_coords(r, d)) for r in W.basis],
            "formatted": [m.format(m.from_coords(r, d)) for r in W.basis]}


def cmd_hom_probe(args):
    fam = build_family(args)
    M = load_module(args)
    if M is None:
        M = trivial_comodule(fam.model, 1, 0)
    caps = [int(c) for c in args.caps.split(",")] if args.caps else [8, 16, 32]
    return {"command": "hom-probe", "family": fam.to_json(), **hom_vanishing_probe(fam, M, caps)}


def cmd_verify_paper(args):
    only = [int(x) for x in args.only.split(",")] if args.only else None
    res = checks.run_all(seed=args.seed, only=only)
    return {"command": "verify-paper", "seed": args.seed, "allPassed": all(r["passed"] for r in res),
            "criteria": res}


COMMANDS = {
    "filtration-dims": cmd_filtration_dims,
    "cofinite-type": cmd_cofinite_type,
    "cofinite-check": cmd_cofinite_check,
    "verdicts": cmd_verdicts,
    "socle": cmd_socle,
    "subcoalgebra": cmd_subcoalgebra,
    "hom-probe": cmd_hom_probe,
    "verify-paper": cmd_verify_paper,
}


# job files --------------------------------------------------------------------------

JOB_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command"],
    "properties": {
        "command": {"enum": sorted(COMMANDS)},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": sorted(MODEL_KINDS)},
                "N": {"type": "integer", "minimum": 2},
                "p": {"type": "integer", "minimum": 2},
                "fieldExt": {"type": "integer", "minimum": 1},
            },
        },
        "family": {"type": ["string", "object"]},
        "module": {"type": ["string", "object"]},
        "d": {"type": "integer", "minimum": 0},
        "r": {"type": "integer", "minimum": 1},
        "cap": {"type": "integer", "minimum": 0},
        "dMax": {"type": "integer", "minimum": 0},
        "rMax": {"type": "integer", "minimum": 1},
        "blocks": {"type": "integer", "minimum": 1},
        "caps": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "elements": {"type": "array"},
        "seed": {"type": "integer"},
        "only": {"type": "array", "items": {"type": "integer"}},
        "format": {"enum": ["json", "csv"]},
    },
}


def job_to_argv(job):
    try:
        jsonschema.validate(job, JOB_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"job file: {exc.message}") from None
    argv = [job["command"]]
    model = job.get("model", {})
    for key, flag in (("kind", "--model"), ("N", "--N"), ("p", "--p"), ("fieldExt", "--field-ext")):
        if key in model:
            argv += [flag, str(model[key])]
    fam = job.get("family")
    if isinstance(fam, str):
        argv += ["--family", fam]
    elif fam is not None:
        argv += ["--family-json", json.dumps(fam)]
    mod = job.get("module")
    if mod is not None:
        argv += ["--module", mod if isinstance(mod, str) else json.dumps(mod)]
    for key, flag in (("d", "--d"), ("r", "--r"), ("cap", "--cap"), ("dMax", "--dmax"),
                      ("rMax", "--rmax"), ("blocks", "--blocks"), ("seed", "--seed"),
                      ("format", "--format")):
        if key in job:
            argv += [flag, str(job[key])]
    if "caps" in job:
        argv += ["--caps", ",".join(str(c) for c in job["caps"])]
    if "elements" in job:
        argv += ["--elements", json.dumps(job["elements"])]
    if "only" in job:
        argv += ["--only", ",".join(str(c) for c in job["only"])]
    return argv


# rendering -------------------------------------------------------------------------

def render_pretty(result):
    if isinstance(result, str):
        return result
    cmd = result.get("command")
    lines = []
    if cmd == "filtration-dims":
        keys = [k for k in ("d", "dim", "lower", "upper") if k in result["rows"][0]] if result["rows"] else []
        lines.append("  ".join(f"{k:>8}" for k in keys))
        for row in result["rows"]:
            lines.append("  ".join(f"{row[k]:>8}" for k in keys))
    elif cmd == "verify-paper":
        for r in result["criteria"]:
            lines.append(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['id']:>2}  {r['label']}")
    elif cmd == "verdicts":
        for key in ("mock", "injective"):
            if key in result:
                rep = result[key]
                lines.append(f"{key}: {rep['verdict']}")
                lines.append(f"{'r':>3} {'dim':>6} {'topDim':>7} {'defect':>7}  free")
                for r, rec in rep["perHeight"].items():
                    lines.append(f"{r:>3} {rec['dim']:>6} {rec['topDim']:>7} {rec['defect']:>7}  {rec['free']}")
    elif cmd == "cofinite-type":
        prof = result["profile"]
        lines.append(f"degree {prof['fittedDegree']}  leading {prof['leadingCoeff']}  period {prof['period']}")
        lines.append(" ".join(str(v) for _, v in prof["dims"]))
    else:
        lines.append(json.dumps(result, indent=2, sort_keys=True))
    return "\n".join(lines)


def dump(result, pretty=False):
    if pretty:
        return render_pretty(result) + "\n"
    if isinstance(result, str):
        return result
    return json.dumps(result, indent=2, sort_keys=True) + "\n"


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=sorted(MODEL_KINDS), default="ga")
    common.add_argument("--N", type=int)
    common.add_argument("--p", type=int, default=2)
    common.add_argument("--field-ext", type=int, default=1)
    common.add_argument("--cap", type=int)
    common.add_argument("--dmax", type=int)
    common.add_argument("--rmax", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out")
    common.add_argument("--pretty", action="store_true")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--family-json")
    common.add_argument("--module", help="comodule or operator-module JSON (inline or file)")
    common.add_argument("--d", type=int)
    common.add_argument("--r", type=int)
    common.add_argument("--blocks", type=int, default=2)
    common.add_argument("--caps")
    common.add_argument("--elements")
    common.add_argument("--only")

    parser = argparse.ArgumentParser(prog="filtcomod", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    run = sub.add_parser("run", help="execute a JSON job file")
    run.add_argument("--job", required=True)
    run.add_argument("--out")
    run.add_argument("--pretty", action="store_true")
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            job = _load_json(args.job if args.job.lstrip()[:1] in "{@" else "@" + args.job)
            inner = job_to_argv(job)
            if args.pretty:
                inner.append("--pretty")
            if args.out:
                inner += ["--out", args.out]
            args = parser.parse_args(inner)
        result = COMMANDS[args.command](args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    text = dump(result, args.pretty)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify-paper" and not result["allPassed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
