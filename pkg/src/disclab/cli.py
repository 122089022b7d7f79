"""Command-line entry point: ``disclab run <suite>`` and ``disclab compare <a> <b>``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import ComparisonError, DisclabError
from .suites import ALL, FAIL, SUITES, _jsonable, config_hash, run_suite


def _parse_nu(text: str) -> list:
    """``8..512`` -> doubling sequence 8, 16, ..., 512; ``8,12,20`` -> explicit list."""
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        out = []
        while lo <= hi:
            out.append(lo)
            lo *= 2
        return out
    return [float(v) for v in text.split(",")]


def _flatten(x, prefix=""):
    """Numeric leaves of a nested observed value as {path: float}."""
    if isinstance(x, dict):
        out = {}
        for k, v in x.items():
            out.update(_flatten(v, f"{prefix}/{k}"))
        return out
    if isinstance(x, list):
        out = {}
        for i, v in enumerate(x):
            out.update(_flatten(v, f"{prefix}[{i}]"))
        return out
    if isinstance(x, bool) or x is None:
        return {prefix: x}
    if isinstance(x, (int, float)):
        return {prefix: float(x)}
    return {prefix: x}


def _numeric_tolerance(tol) -> float:
    if isinstance(tol, (int, float)) and not isinstance(tol, bool):
        return float(tol)
    if isinstance(tol, dict):
        vals = [v for v in tol.values() if isinstance(v, (int, float))]
        if vals:
            return float(min(vals))
    return 1e-9


def compare_reports(baseline: dict, current: dict) -> dict:
    """Per-check relative drift between two reports of the same suite and config."""
    if baseline.get("suite") != current.get("suite"):
        raise ComparisonError("reports belong to different suites")
    if config_hash(baseline.get("config", {})) != config_hash(current.get("config", {})):
        raise ComparisonError("reports were produced with different configurations")
    cur = {c["id"]: c for c in current["checks"]}
    rows, flagged = [], False
    for c in baseline["checks"]:
        if c["id"] not in cur:
            rows.append({"id": c["id"], "structural": "missing in current", "flagged": True})
            flagged = True
            continue
        a, b = _flatten(c["observed"]), _flatten(cur[c["id"]]["observed"])
        tol = _numeric_tolerance(c.get("tolerance"))
        drift, structural = 0.0, None
        if set(a) != set(b):
            structural = "observed fields differ"
        for key in set(a) & set(b):
            x, y = a[key], b[key]
            if isinstance(x, float) and isinstance(y, float):
                d = abs(y - x) / max(abs(x), 1e-300) if x != y else 0.0
                drift = max(drift, d if math.isfinite(d) else math.inf)
            elif x != y:
                structural = structural or "non-numeric value changed"
        status_changed = c["status"] != cur[c["id"]]["status"]
        flag = drift > tol or structural is not None or status_changed
        flagged |= flag
        rows.append({"id": c["id"], "drift": drift, "tolerance": tol, "structural": structural,
                     "status_changed": status_changed, "flagged": flag})
    for cid in sorted(set(cur) - {c["id"] for c in baseline["checks"]}):
        rows.append({"id": cid, "structural": "missing in baseline", "flagged": True})
        flagged = True
    return {"suite": baseline["suite"], "flagged": flagged, "checks": rows}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disclab", description="Disc multiplier numerical laboratory.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment suite")
    r.add_argument("suite", help=f"one of: {', '.join(SUITES + [ALL])}")
    r.add_argument("--config", type=Path, help="flat JSON file of parameter overrides")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", type=Path, default=Path("out"))
    r.add_argument("--nu", help="order list for bessel-check, e.g. 8..512")
    r.add_argument("--no-figures", action="store_true")
    c = sub.add_parser("compare", help="compare two reports")
    c.add_argument("baseline", type=Path)
    c.add_argument("current", type=Path)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            if args.suite not in SUITES + [ALL]:
                parser.print_usage(sys.stderr)
                print(f"disclab: unknown suite {args.suite!r}", file=sys.stderr)
                return 2
            cfg = json.loads(args.config.read_text()) if args.config else {}
            if args.nu:
                cfg["bessel.nu_list"] = _parse_nu(args.nu)
            try:
                args.out.mkdir(parents=True, exist_ok=True)
                probe = args.out / ".write_probe"
                probe.write_text("")
                probe.unlink()
            except OSError as e:
                print(f"disclab: output directory not writable: {e}", file=sys.stderr)
                return 2
            rep = run_suite(args.suite, cfg, args.seed, args.out, figures=not args.no_figures)
            for chk in sorted(rep.checks, key=lambda c: c.id):
                print(f"{chk.id:32s} {chk.status}")
            return 1 if any(c.status == FAIL for c in rep.checks) else 0
        base = json.loads(args.baseline.read_text())
        cur = json.loads(args.current.read_text())
        summary = compare_reports(base, cur)
        print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
        return 1 if summary["flagged"] else 0
    except (DisclabError, json.JSONDecodeError, OSError) as e:
        print(f"disclab: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
