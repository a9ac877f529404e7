"""Batch front-end.

    dnormal check FILE        regularity report (exit 0 regular, 1 not)
    dnormal verify FILE       full symmetry certificate
    dnormal laws              double-category law suite
    dnormal gen               deterministic regular square
    dnormal linearize FILE    tangent square of a polynomial square

Exit codes: 0 pass, 1 mathematical failure, 2 input or configuration error.
"""

import argparse
import json
import random
import sys

from .linalg import DimensionError, CompatibilityError
from .symmetry import (SquareError, is_regular, random_dims, random_regular_square,
                       square_from_json, symmetry_iso)
from .dblcat import law_report
from .polymap import (ArityError, ImmersionFailure, NotCommuting, PolyError, linearize_square_at,
                      poly_square_from_json)

OK, MATH_FAIL, INPUT_ERROR = 0, 1, 2
SEED_MAX = 2 ** 64 - 1


class InputError(Exception):
    pass


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer") from None
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _dims(text):
    try:
        d = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("dims look like 1,2,2,4") from None
    if len(d) != 4:
        raise argparse.ArgumentTypeError("dims need four entries M1,M2,N1,N2")
    return d


def _read_json(path):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc.strerror)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("%s: invalid JSON at line %d column %d: %s"
                         % (path, exc.lineno, exc.colno, exc.msg)) from None


def load_square(path):
    """Linear or polynomial square file -> ImmersionSquare.  Polynomial input is
    linearized at its point; immersion failure there is a mathematical failure."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError("%s: top level must be an object" % path)
    if doc.get("poly"):
        try:
            maps = poly_square_from_json(doc)
        except PolyError as exc:
            raise InputError("%s: %s" % (path, exc)) from None
        return linearize_square_at(*maps)
    try:
        return square_from_json(doc)
    except DimensionError as exc:
        raise InputError("%s: %s" % (path, exc)) from None
    except SquareError as exc:
        msg = str(exc)
        if "injective" in msg or "commute" in msg:
            raise
        raise InputError("%s: %s" % (path, msg)) from None


def _emit(args, doc, human):
    if args.format == "machine":
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        text = human(doc)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(rows):
    w = max((len(str(k)) for k, _ in rows), default=0)
    return "".join("%-*s  %s\n" % (w, k, v) for k, v in rows)


def _criteria_rows(report):
    return [(k, report[k]) for k in sorted(report)]


def cmd_check(args):
    sq = load_square(args.input)
    regular, report = is_regular(sq)
    doc = {"regular": regular, "criteria": report, "dims": sq.dims}
    _emit(args, doc, lambda d: _table([("regular", d["regular"])] + _criteria_rows(d["criteria"])))
    return OK if regular else MATH_FAIL


def _verify_human(d):
    rows = [("regular", d["regular"])]
    if not d["regular"]:
        return _table(rows + _criteria_rows(d["criteria"]))
    rows += [("check " + k, v) for k, v in sorted(d["checks"].items())]
    rows += [("lemma " + l["name"], "pass" if l["pass"] else "FAIL") for l in d["lemmas"]]
    rows += [("alt_agreement", d["alt_agreement"]), ("passed", d["passed"])]
    lam = d["lambda"]
    out = _table(rows)
    if lam is not None:
        out += "lambda (%dx%d):\n" % (len(lam), len(lam[0]) if lam else 0)
        out += "".join("  " + " ".join("%6s" % x for x in row) + "\n" for row in lam)
    return out


def cmd_verify(args):
    sq = load_square(args.input)
    cert = symmetry_iso(sq)
    doc = cert.to_json()
    doc["passed"] = cert.passed
    _emit(args, doc, _verify_human)
    return OK if cert.passed else MATH_FAIL


def cmd_laws(args):
    report = law_report(args.seed, args.trials)
    failed = sum(e["failures"] for e in report)
    doc = {"seed": args.seed, "trials": args.trials, "laws": report, "passed": failed == 0}
    _emit(args, doc, lambda d: _table(
        [(e["axiom"], "%d/%d pass" % (e["trials"] - e["failures"], e["trials"])) for e in d["laws"]]
        + [("passed", d["passed"])]))
    return OK if failed == 0 else MATH_FAIL


def cmd_gen(args):
    dims = args.dims
    if dims is None:
        rng = random.Random(args.seed)
        dims = random_dims(rng, args.max_dim)
        while dims[2] + dims[1] - dims[0] > dims[3]:
            dims = random_dims(rng, args.max_dim)
    try:
        sq = random_regular_square(args.seed, dims)
    except SquareError as exc:
        raise InputError(str(exc)) from None
    doc = sq.to_json()
    _emit(args, doc, lambda d: json.dumps(d, sort_keys=True) + "\n")
    return OK


def cmd_linearize(args):
    doc = _read_json(args.input)
    if not isinstance(doc, dict):
        raise InputError("%s: top level must be an object" % args.input)
    try:
        maps = poly_square_from_json(doc)
    except PolyError as exc:
        raise InputError("%s: %s" % (args.input, exc)) from None
    sq = linearize_square_at(*maps)
    _emit(args, sq.to_json(), lambda d: json.dumps(d, sort_keys=True) + "\n")
    return OK


def build_parser():
    p = argparse.ArgumentParser(prog="dnormal", description="Double normal bundles of immersion squares.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("human", "machine"), default="human")
        sp.add_argument("-o", "--output", help="write to a file instead of stdout")

    for name, fn, help_ in (("check", cmd_check, "run the regularity criteria"),
                            ("verify", cmd_verify, "build and certify the flip isomorphism"),
                            ("linearize", cmd_linearize, "linearize a polynomial square at its point")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", help="square file, or - for stdin")
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("laws", help="run the double-category law suite")
    sp.add_argument("--seed", type=_seed, default=7)
    sp.add_argument("--trials", type=_positive, default=500)
    common(sp)
    sp.set_defaults(func=cmd_laws)

    sp = sub.add_parser("gen", help="emit a seeded regular square")
    sp.add_argument("--seed", type=_seed, default=0)
    sp.add_argument("--dims", type=_dims, help="M1,M2,N1,N2")
    sp.add_argument("--max-dim", type=_positive, default=4)
    common(sp)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        return args.func(args)
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return INPUT_ERROR
    except (ImmersionFailure, NotCommuting) as exc:
        print("failure: %s" % exc, file=sys.stderr)
        return MATH_FAIL
    except ArityError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return INPUT_ERROR
    except (SquareError, CompatibilityError, PolyError) as exc:
        print("failure: %s" % exc, file=sys.stderr)
        return MATH_FAIL


if __name__ == "__main__":
    sys.exit(main())
