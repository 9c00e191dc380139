"""Command-line entry point.

    nonlocal-absorption run CONFIG [--out DIR] [--strict]
    nonlocal-absorption suite SUITE [--out DIR] [--threads N] [--strict]
    nonlocal-absorption profile --alpha A --A AMP --diffusivity D --eta-max E

``SUITE`` is a JSON file ``{"name": ..., "configs": [paths]}`` or the name
of a bundled suite (``theorems``).  The output directory defaults to
``$NONLOCAL_ABSORPTION_OUT`` and then to ``./runs``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from . import grid as _grid
from .experiments import ConfigError, load_config, run_experiment
from .semigroup import self_similar_profile

OUT_ENV = "NONLOCAL_ABSORPTION_OUT"

log = logging.getLogger("nonlocal_absorption")


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "runs"))


def _write_outputs(result, target: Path):
    """Write into a scratch directory and move it into place only when complete."""
    target.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        for label, curve in sorted(result.curves.items()):
            curve.to_csv(scratch / f"curve_{label}.csv")
        for label, obj in sorted(result.extra_csv.items()):
            obj.to_csv(scratch / f"{label}.csv")
        (scratch / "report.json").write_text(json.dumps(result.report, indent=2, sort_keys=True) + "\n")
        if target.exists():
            shutil.rmtree(target)
        os.replace(scratch, target)
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise


def run_config(path, out: Path, strict: bool = False) -> dict:
    cfg = load_config(path)
    result = run_experiment(cfg, strict=strict)
    _write_outputs(result, out / cfg.name)
    return result.report


def resolve_suite(name_or_path) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = resources.files("nonlocal_absorption") / "configs" / f"{name_or_path}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"no suite file or bundled suite named {name_or_path!r}")


def verify_suite(suite_path, out: Path, threads: int = 1, strict: bool = False) -> dict:
    """Run every config of a suite and aggregate the reports."""
    suite_path = resolve_suite(suite_path)
    try:
        suite = json.loads(Path(suite_path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse suite {suite_path}: {exc}") from None
    base = Path(suite_path).parent
    paths = [base / c for c in suite.get("configs", [])]
    configs = [load_config(p) for p in paths]  # validate everything before running anything
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError("config names in a suite must be unique")

    def one(cfg):
        result = run_experiment(cfg, strict=strict)
        _write_outputs(result, out / cfg.name)
        return result.report

    if threads > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(one, configs))
    else:
        reports = [one(c) for c in configs]
    agg = {
        "suite": suite.get("name", Path(suite_path).stem),
        "reports": reports,
        "passed": all(r["passed"] for r in reports),
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "suite_report.json").write_text(json.dumps(agg, indent=2, sort_keys=True) + "\n")
    return agg


def _fmt(measured) -> str:
    if isinstance(measured, float):
        return f"{measured:.4g}"
    if isinstance(measured, dict):
        keys = [k for k in ("slope", "ratio", "worst", "error", "sup_distance", "relative_error", "drift") if k in measured]
        if keys:
            return ", ".join(f"{k}={measured[k]:.4g}" for k in keys if isinstance(measured[k], float))
    text = json.dumps(measured)
    return text if len(text) < 60 else text[:57] + "..."


def summary_table(reports) -> str:
    rows = [("experiment", "check", "verifies", "measured", "result")]
    for rep in reports:
        for c in rep["checks"]:
            rows.append((rep["name"], c["name"], c["statement"], _fmt(c["measured"]), "PASS" if c["passed"] else "FAIL"))
        for flag in rep.get("flags", []):
            rows.append((rep["name"], flag, "audit", "-", "FAIL"))
    widths = [min(max(len(r[i]) for r in rows), 70) for i in range(5)]
    lines = ["  ".join(cell[:w].ljust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonlocal-absorption", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./runs)")
    common.add_argument("--threads", type=int, default=1, help="concurrent experiments / FFT workers")
    common.add_argument("--strict", action="store_true", help="treat audit failures as check failures")

    r = sub.add_parser("run", parents=[common], help="run one experiment config")
    r.add_argument("config")
    s = sub.add_parser("suite", parents=[common], help="run a suite of configs")
    s.add_argument("suite")
    pr = sub.add_parser("profile", help="tabulate the self-similar profile f(eta) as CSV")
    pr.add_argument("--alpha", type=float, required=True)
    pr.add_argument("--A", type=float, default=1.0)
    pr.add_argument("--diffusivity", type=float, required=True)
    pr.add_argument("--eta-max", type=float, default=4.0)
    pr.add_argument("--n-eta", type=int, default=401)
    pr.add_argument("--dimension", type=int, default=1)
    pr.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "profile":
            prof = self_similar_profile(args.alpha, args.A, args.diffusivity, args.eta_max, args.n_eta, args.dimension)
            if args.out is None:
                print("eta,f")
                for e, v in zip(prof.eta, prof.values):
                    print(f"{float(e)!r},{float(v)!r}")
            else:
                prof.to_csv(args.out)
            return 0
        _grid.FFT_WORKERS = max(1, args.threads)
        out = args.out or default_out()
        if args.command == "run":
            report = run_config(args.config, out, args.strict)
            print(summary_table([report]))
            if "truncation" in report["flags"]:
                print("truncation: domain audit failed", file=sys.stderr)
            return 0 if report["passed"] else 1
        agg = verify_suite(args.suite, out, args.threads, args.strict)
        print(summary_table(agg["reports"]))
        print(f"\nsuite {agg['suite']}: {'PASS' if agg['passed'] else 'FAIL'}")
        return 0 if agg["passed"] else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
