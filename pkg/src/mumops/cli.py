"""Command-line interface: ``mumops <command> [--family ID | --operator-file PATH] ...``.

Every command builds a plain document (dicts, lists and strings) and renders it
as JSON, CSV or plain text.  Rationals are always written as ``p/q`` strings.

JSON keys
---------
series           ``{"truncation": T, "coefficients": {"0": "1", "1": "-7", ...}}``
instantons       ``{"weight", "period", "denominator", "values", "scaled", "parameters"}``
checks           ``[{"name", "ok", "detail"}]``
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__, acceptance, coupling, frobenius, modular
from .geometry import CatalogError, WeierstrassData, derive_pf, load_catalog, twist_series
from .operators import OperatorParseError, ThetaOperator, annihilator_search, parse_operator
from .series import RationalSeries, SeriesError

DEFAULT_TRUNCATION = 40
COMMANDS = (
    "frobenius", "mirror-map", "yukawa", "instantons", "dual-instantons",
    "modular-check", "twist", "derive-pf", "catalog", "verify-all",
)


class UsageError(Exception):
    pass


def rat(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def series_doc(s: RationalSeries, offset=0) -> dict:
    return {
        "truncation": s.truncation,
        "coefficients": {rat(offset + m): rat(s[m]) for m in range(s.truncation + 1)},
    }


def sequence_doc(seq: coupling.InstantonSequence, source: dict) -> dict:
    return {
        "weight": seq.weight,
        "period": seq.period,
        "denominator": seq.denominator,
        "values": [rat(v) for v in seq.values],
        "scaled": [rat(v * (seq.denominator or 1)) for v in seq.values],
        "parameters": source,
    }


# ---------------------------------------------------------------- inputs


def _truncation(args) -> int:
    if args.truncation is not None:
        T = args.truncation
    else:
        env = os.environ.get("MUMOPS_TRUNCATION")
        try:
            T = int(env) if env else DEFAULT_TRUNCATION
        except ValueError:
            raise UsageError(f"MUMOPS_TRUNCATION must be an integer, got {env!r}") from None
    if T < 1:
        raise UsageError(f"truncation must be positive, got {T}")
    return T


def _fraction(text: str | None, name: str):
    if text is None:
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--{name} expects a rational p/q, got {text!r}") from None


def _entry(args):
    return load_catalog().lookup(args.family) if args.family else None


def _operator(args) -> tuple[ThetaOperator, object]:
    """The Picard-Fuchs operator L together with the catalog entry, if any."""
    if bool(args.family) == bool(args.operator_file):
        raise UsageError("give exactly one of --family or --operator-file")
    if args.family:
        e = _entry(args)
        return (e.quantum if args.quantum else e.operator), e
    path = Path(args.operator_file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_operator(text), None


def _quantum(args) -> tuple[ThetaOperator, object]:
    L, e = _operator(args)
    if e is not None:
        return e.quantum, e
    return (L if args.quantum else L.borel_shift()), None


# ---------------------------------------------------------------- commands


def cmd_frobenius(args, T):
    L, _ = _operator(args)
    b = frobenius.frobenius_basis(L, T)
    return {"operator": L.to_text(), "order": b.order, "h": [series_doc(h) for h in b.h]}


def cmd_mirror_map(args, T):
    L, _ = _operator(args)
    mm = frobenius.mirror_map(frobenius.frobenius_basis(L, T))
    return {"operator": L.to_text(), "q_of_t": series_doc(mm.q_of_t), "t_of_q": series_doc(mm.t_of_q)}


def cmd_yukawa(args, T):
    D, _ = _quantum(args)
    return {"operator": D.to_text(), "yukawa": series_doc(coupling.virtual_yukawa(D, T).yukawa)}


def cmd_instantons(args, T):
    D, e = _quantum(args)
    weight = args.weight if args.weight is not None else (e.instanton_weight if e else D.order - 1)
    Y = coupling.virtual_yukawa(D, T).yukawa
    seq = coupling.lambert_extract(Y, weight)
    return {"operator": D.to_text(), "instantons": sequence_doc(seq, {"weight": weight})}


def cmd_dual_instantons(args, T):
    D, e = _quantum(args)
    get = (lambda k, d: e.rational(k, d)) if e else (lambda k, d: d)
    weight = args.weight if args.weight is not None else (e.dual_weight if e else max(6 - D.order, 1))
    beta = _fraction(args.beta, "beta")
    mu = _fraction(args.mu, "mu")
    params = {
        "beta": beta if beta is not None else get("duals.beta", Fraction(-1)),
        "nu": args.nu if args.nu is not None else int(get("duals.nu", 1)),
        "mu": mu if mu is not None else get("duals.mu", Fraction(1)),
        "weight": weight,
    }
    Y = coupling.virtual_yukawa(D, T).yukawa
    seq = coupling.dual_instantons(Y, weight, params["beta"], params["nu"], params["mu"])
    source = {k: (rat(v) if isinstance(v, Fraction) else v) for k, v in params.items()}
    return {"operator": D.to_text(), "dual_instantons": sequence_doc(seq, source)}


def cmd_modular_check(args, T):
    checks = []
    if args.lhs or args.rhs:
        if not (args.lhs and args.rhs):
            raise UsageError("--lhs and --rhs go together")
        r = modular.identity_check(modular.evaluate(args.lhs, T), modular.evaluate(args.rhs, T), T)
        checks.append(("lhs = rhs", r.ok, r.message))
    else:
        e = _entry(args)
        if e is None:
            raise UsageError("modular-check needs --family or --lhs/--rhs")
        L = e.operator
        b = frobenius.frobenius_basis(L, T)
        tq = frobenius.mirror_map(b).t_of_q
        pairs = [
            ("hauptmodul", "hauptmodul", lambda: tq),
            ("period", "period", lambda: b.h[0].compose(tq)),
            ("yukawa", "yukawa.modular", lambda: coupling.virtual_yukawa(e.quantum, T).yukawa),
        ]
        for name, key, compute in pairs:
            text = e.get(key)
            if text:
                r = modular.identity_check(modular.as_qexpansion(compute()), modular.evaluate(text, T), T)
                checks.append((name, r.ok, r.message))
        if not checks:
            raise UsageError(f"{e.id} has no modular expressions")
    return {"checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in checks]}, all(ok for _, ok, _ in checks)


def cmd_twist(args, T):
    e = _entry(args)
    if e is None:
        raise UsageError("twist needs --family")
    target = None
    if e.get("twist.source_family") and args.ij is None:
        target = e
        source = load_catalog().lookup(e.get("twist.source_family"))
        ij = e.get("twist.ij", "1,1")
        scale = e.rational("twist.arg_scale", Fraction(1))
    else:
        source = e
        ij = args.ij or "1,1"
        scale = Fraction(1)
    if args.arg_scale is not None:
        scale = _fraction(args.arg_scale, "arg-scale")
    try:
        i, j = (int(x) for x in ij.split(","))
    except ValueError:
        raise UsageError(f"--ij expects two integers 'i,j', got {ij!r}") from None
    f = frobenius.frobenius_basis(source.operator, T).h[0]
    tw = twist_series(i, j, f, scale)
    doc = {"source": source.id, "ij": [i, j], "arg_scale": rat(scale), "series": series_doc(tw)}
    ok = True
    if target is not None and (i, j) == (1, 1):
        annihilated = target.operator.apply(tw).is_zero()
        doc["annihilated_by"] = {"operator": target.operator.to_text(), "ok": annihilated}
        ok = annihilated
    if args.order is not None or (target is not None and (i, j) == (1, 1)):
        order = args.order if args.order is not None else target.operator.order
        degree = args.degree if args.degree is not None else target.operator.t_degree
        found = annihilator_search(tw, order, degree)
        doc["annihilator"] = None if found is None else {
            "operator": found.operator.to_text(), "ambiguous": found.ambiguous, "nullity": found.nullity,
        }
    return doc, ok


def cmd_derive_pf(args, T):
    if args.g2 or args.g3:
        if not (args.g2 and args.g3):
            raise UsageError("--g2 and --g3 go together")
        w = WeierstrassData.parse(args.g2, args.g3)
        e = None
    else:
        e = _entry(args)
        w = e.weierstrass if e else None
        if w is None:
            raise UsageError("derive-pf needs an elliptic --family or --g2/--g3")
    op = derive_pf(w)
    doc = {"operator": op.to_text()}
    ok = True
    if e is not None:
        doc["matches_catalog"] = ok = op == e.operator
    return doc, ok


def cmd_catalog(args, T):
    cat = load_catalog()
    if not args.family:
        return {"version": cat.version, "families": cat.ids()}
    e = cat.lookup(args.family)
    return {
        "id": e.id, "kind": e.kind, "level": e.level, "index": e.index,
        "operator": e.operator.to_text(), "quantum": e.quantum.to_text(),
        "data": dict(sorted(e.data.items())),
    }


def _criterion_doc(number: int, T: int) -> dict:
    r = acceptance.run_criterion(number, T)
    return {
        "criterion": r.number, "title": r.title, "ok": r.ok, "first_failure": r.first_failure,
        "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in r.checks],
    }


def cmd_verify_all(args, T):
    numbers = range(1, len(acceptance.CRITERIA) + 1)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_criterion_doc, numbers, [T] * len(numbers)))
    else:
        results = [_criterion_doc(n, T) for n in numbers]
    ok = all(r["ok"] for r in results)
    return {"ok": ok, "truncation": T, "criteria": results}, ok


HANDLERS = {
    "frobenius": cmd_frobenius, "mirror-map": cmd_mirror_map, "yukawa": cmd_yukawa,
    "instantons": cmd_instantons, "dual-instantons": cmd_dual_instantons,
    "modular-check": cmd_modular_check, "twist": cmd_twist, "derive-pf": cmd_derive_pf,
    "catalog": cmd_catalog, "verify-all": cmd_verify_all,
}


# ---------------------------------------------------------------- rendering


def _flatten(doc, prefix=""):
    if isinstance(doc, dict):
        for k, v in doc.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, "" if doc is None else str(doc).lower() if isinstance(doc, bool) else str(doc)


def render(doc, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(_flatten(doc))
        return buf.getvalue()
    if "criteria" in doc:  # verify-all: one line per criterion
        lines = []
        for c in doc["criteria"]:
            tail = f" ({len(c['checks'])} checks)" if c["ok"] else f" -- {c['first_failure']}"
            lines.append(f"[{'PASS' if c['ok'] else 'FAIL'}] criterion {c['criterion']}: {c['title']}{tail}")
        return "\n".join(lines) + "\n"
    return "".join(f"{k} = {v}\n" for k, v in _flatten(doc))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mumops", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mumops {__version__}")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_argument_group("input")
    src.add_argument("--family", help="catalog id, see 'mumops catalog'")
    src.add_argument("--operator-file", help="UTF-8 file with a theta-form Picard-Fuchs operator")
    src.add_argument("--quantum", action="store_true",
                     help="use the quantum operator: the catalog's for --family, the file itself for --operator-file")
    p.add_argument("--truncation", type=int, help=f"series truncation (default $MUMOPS_TRUNCATION or {DEFAULT_TRUNCATION})")
    p.add_argument("--weight", type=int, help="Lambert weight")
    p.add_argument("--beta", help="B-field constant for dual instantons")
    p.add_argument("--nu", type=int, help="covering index for dual instantons")
    p.add_argument("--mu", help="overall scale of dual instantons")
    p.add_argument("--lhs", help="q-expression for modular-check")
    p.add_argument("--rhs", help="q-expression for modular-check")
    p.add_argument("--ij", help="twist indices 'i,j'")
    p.add_argument("--arg-scale", help="twist argument scale")
    p.add_argument("--order", type=int, help="annihilator search order")
    p.add_argument("--degree", type=int, help="annihilator search t-degree")
    p.add_argument("--g2", help="Weierstrass g2(t)")
    p.add_argument("--g3", help="Weierstrass g3(t)")
    p.add_argument("--format", dest="output_format", choices=("json", "csv", "plain"), default="json")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for verify-all")
    return p


_RATIONAL_FLAGS = ("--beta", "--mu", "--arg-scale")


def _attach_negative_rationals(argv: list[str]) -> list[str]:
    """argparse mistakes ``--mu -1/4`` for two options; rewrite it as ``--mu=-1/4``."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _RATIONAL_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_negative_rationals(argv))
    try:
        T = _truncation(args)
        out = HANDLERS[args.command](args, T)
    except OperatorParseError as exc:
        print(f"error: operator parse error: {exc}", file=sys.stderr)
        return 2
    except CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, ArithmeticError, SeriesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc, ok = out if isinstance(out, tuple) else (out, True)
    sys.stdout.write(render(doc, args.output_format))
    if not ok:
        failed = doc.get("criteria") and next(c for c in doc["criteria"] if not c["ok"])
        if failed:
            print(f"error: criterion {failed['criterion']} failed: {failed['first_failure']}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
