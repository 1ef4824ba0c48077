"""``phm-lab`` command line."""

from __future__ import annotations

import argparse
import json
import sys

from .catalog import CATALOG, FlagMismatch, ScenarioError, catalog_ids, catalog_lookup
from .config import ConfigError, load_config
from .runner import EngineError, emit_report, exit_code, resolve_scenario, run_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ENGINE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _scalar(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ConfigError("--param", f"expected k=v, got {item!r}")
        out[key] = _scalar(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phm-lab", description="Numerical checks for pseudo-harmonic morphisms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run checks on a scenario")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON run configuration")
    src.add_argument("--scenario", help="catalog id")
    run.add_argument("--param", action="append", metavar="K=V", help="catalog parameter (repeatable)")
    run.add_argument("--checks", help="comma separated check names")
    run.add_argument("--points", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--fail-threshold", type=float, dest="fail_threshold")
    run.add_argument("--format", choices=("json", "text"))
    run.add_argument("--workers", type=int)
    run.add_argument("--out", help="write the report here instead of stdout")

    cat = sub.add_parser("catalog", help="inspect the scenario catalog")
    csub = cat.add_subparsers(dest="action", required=True, parser_class=_Parser)
    csub.add_parser("list")
    show = csub.add_parser("show")
    show.add_argument("id")
    return p


def _run_document(args) -> dict:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as e:
            raise ConfigError(args.config, f"cannot read: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(args.config, f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
        if args.param:
            raise ConfigError("--param", "use the config file's scenario.params with --config")
    else:
        params = _params(args.param)
        doc = {"scenario": {"catalog": args.scenario, "params": params}}
    if not isinstance(doc, dict):
        raise ConfigError("$", "expected an object")
    if args.checks is not None:
        doc["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    for key in ("points", "seed", "tol", "fail_threshold", "format", "workers"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    return doc


def _cmd_run(args) -> int:
    cfg = load_config(_run_document(args))
    scenario = resolve_scenario(cfg.scenario)
    reports = run_checks(cfg, scenario)
    label = cfg.scenario.label if cfg.scenario.inline is not None else scenario.id
    text = emit_report(reports, cfg.format, cfg, label)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return exit_code(reports)


def _cmd_catalog(args) -> int:
    if args.action == "list":
        width = max(map(len, catalog_ids()))
        for cid in catalog_ids():
            print(f"{cid.ljust(width)}  {CATALOG[cid][2]}")
        return EXIT_OK
    if args.id not in CATALOG:
        raise ScenarioError("unknown id", f"no catalog entry {args.id!r}")
    desc = catalog_lookup(args.id, verify=False).describe()
    desc["param_ranges"] = {k: {"default": s.default, "min": s.lo, "max": s.hi}
                            for k, s in CATALOG[args.id][1].items()}
    print(json.dumps(desc, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_catalog(args)
    except (ConfigError, ScenarioError) as e:
        print(f"phm-lab: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"phm-lab: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (EngineError, FlagMismatch, ArithmeticError) as e:
        print(f"phm-lab: engine error: {e}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
