"""Command-line front end.

Commands:

* ``verify-ambient MODEL``: structure and Sasakian identity checks on a
  registry model.
* ``run SCENARIO``: execute a scenario file.
* ``slant SCENARIO`` / ``curvature SCENARIO``: shortcuts for ``run`` with
  the check set forced to {slant} / {lemma41, theorem42}.
* ``list``: registry contents.

Output formats: ``table`` (human, includes wall time) and ``records``
(machine, line-delimited, byte-deterministic under a fixed seed; floats are
printed with 17 significant digits). Exit codes: 0 all checks passed,
1 at least one check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass

import numpy as np

from .ambient import (
    CheckRecord,
    DEFAULT_SEED,
    default_sample_points,
    get_structure,
    list_structures,
    verify_sasakian,
    verify_structure,
)
from .dsl.scenario import CHECK_NAMES, Scenario, load_scenario
from .errors import EvaluationError, ParseError, ScenarioError, SlantLabError, UsageError
from .runner import (
    STATUS_CHECK_FAILED,
    STATUS_PASS,
    RunSummary,
    run_scenario,
)
from .slant import SlantReport
from .submanifold import list_immersions
from .tensor_core import FDConfig


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _fmt_point(point) -> str:
    return "(" + ",".join(_fmt(float(c)) for c in point) + ")"


def format_records(summary: RunSummary) -> str:
    """Machine-readable mode: one structured record per line, fixed field
    order (name, residual, tolerance, passed, point)."""
    lines = []
    for r in summary.records:
        lines.append(
            "check\t{}\t{}\t{}\t{}\t{}".format(
                r.name,
                _fmt(r.max_residual),
                _fmt(r.tolerance),
                "true" if r.passed else "false",
                _fmt_point(r.worst_point),
            )
        )
    if summary.slant_report is not None:
        rep = summary.slant_report
        lines.append(f"slant\tlambda\t{_fmt(rep.lambda_fit)}")
        lines.append(f"slant\tfit-residual\t{_fmt(rep.fit_residual)}")
        lines.append(f"slant\ttheta\t{_fmt(rep.theta)}")
        lines.append(f"slant\tclassification\t{rep.classification}")
        spectrum = ";".join(f"{_fmt(lam)}x{mult}" for lam, mult in rep.spectrum)
        lines.append(f"slant\tspectrum\t{spectrum}")
        for point, theta in rep.per_point:
            lines.append(f"slant\tpoint-theta\t{_fmt_point(point)}\t{_fmt(theta)}")
    passed = sum(1 for r in summary.records if r.passed)
    lines.append(
        f"summary\t{summary.scenario_name}\t{summary.exit_status}\t"
        f"{passed}/{len(summary.records)}"
    )
    return "\n".join(lines) + "\n"


def parse_records(text: str):
    """Parse machine-mode output back into records and report fields.

    Returns (records, slant_fields, summary_line_fields).
    """
    records: list[CheckRecord] = []
    slant_fields: dict[str, object] = {}
    summary = None
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if parts[0] == "check":
            name, resid, tolerance, passed, point = parts[1:6]
            coords = tuple(float(c) for c in point.strip("()").split(",") if c)
            rec = CheckRecord(
                name=name,
                max_residual=float(resid),
                tolerance=float(tolerance),
                samples=0,
                passed=passed == "true",
                worst_point=coords,
            )
            records.append(rec)
        elif parts[0] == "slant":
            if parts[1] == "point-theta":
                slant_fields.setdefault("point-theta", []).append(
                    (parts[2], float(parts[3]))
                )
            elif parts[1] in ("lambda", "fit-residual", "theta"):
                slant_fields[parts[1]] = float(parts[2])
            else:
                slant_fields[parts[1]] = parts[2]
        elif parts[0] == "summary":
            summary = tuple(parts[1:])
    return records, slant_fields, summary


def format_table(summary: RunSummary) -> str:
    lines = [f"scenario: {summary.scenario_name}"]
    lines.append(f"{'identity':<44} {'residual':>12} {'tolerance':>12}  status")
    for r in summary.records:
        lines.append(
            f"{r.name:<44} {r.max_residual:>12.3g} {r.tolerance:>12.3g}  "
            f"{'pass' if r.passed else 'FAIL'}"
        )
    if summary.slant_report is not None:
        rep = summary.slant_report
        lines.append("")
        lines.append(
            f"slant report: classification={rep.classification} "
            f"lambda={rep.lambda_fit:.6g} theta={rep.theta:.6g} rad "
            f"fit-residual={rep.fit_residual:.3g}"
        )
        if rep.spectrum:
            spect = ", ".join(f"{lam:.6g} (x{mult})" for lam, mult in rep.spectrum)
            lines.append(f"operator spectrum: {spect}")
        thetas = [th for _, th in rep.per_point]
        if thetas:
            lines.append(
                f"per-point theta spread: min={min(thetas):.6g} max={max(thetas):.6g}"
            )
    passed = sum(1 for r in summary.records if r.passed)
    lines.append("")
    lines.append(
        f"{passed}/{len(summary.records)} checks passed; status {summary.exit_status}; "
        f"wall time {summary.wall_time:.2f} s"
    )
    return "\n".join(lines) + "\n"


def _emit(summary: RunSummary, fmt: str) -> int:
    if fmt == "records":
        sys.stdout.write(format_records(summary))
    else:
        sys.stdout.write(format_table(summary))
    return 0 if summary.exit_status == STATUS_PASS else 1


def _parse_tolerances(entries) -> dict[str, float]:
    out = {}
    for entry in entries or []:
        if "=" not in entry:
            raise UsageError(f"--tolerance expects NAME=VALUE, got {entry!r}")
        name, value = entry.split("=", 1)
        name = name.strip()
        if name not in CHECK_NAMES:
            raise UsageError(
                f"unknown tolerance name {name!r}; known: {', '.join(CHECK_NAMES)}"
            )
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"bad tolerance value {value!r} for {name!r}")
    return out


def _default_seed() -> int:
    env = os.environ.get("SLANTLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"SLANTLAB_SEED must be an integer, got {env!r}")
    return DEFAULT_SEED


def _cfg_from_args(args) -> FDConfig:
    kwargs = {}
    if args.fd_step is not None:
        kwargs["step"] = args.fd_step
    return FDConfig(**kwargs)


def cmd_verify_ambient(args) -> int:
    cfg = _cfg_from_args(args)
    structure = get_structure(args.model, cfg)
    seed = args.seed if args.seed is not None else _default_seed()
    count = args.samples if args.samples is not None else 100
    tolerances = _parse_tolerances(args.tolerance)
    points = default_sample_points(structure.dim, count, seed)
    records = list(
        verify_structure(structure, points, tolerances.get("structure", 1e-10))
    )
    records.extend(
        verify_sasakian(
            structure,
            points,
            cfg,
            tolerances.get("sasakian", 1e-5),
            rng=np.random.default_rng(seed),
        )
    )
    records.sort(key=lambda r: r.name)
    summary = RunSummary(
        scenario_name=f"verify-ambient:{structure.name}",
        records=tuple(records),
        slant_report=None,
        wall_time=0.0,
        exit_status=STATUS_PASS if all(r.passed for r in records) else STATUS_CHECK_FAILED,
    )
    return _emit(summary, args.format)


def _load_scenario_file(path: str, args, forced_checks=None) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read scenario {path!r}: {exc}")
    name = os.path.splitext(os.path.basename(path))[0]
    scn = load_scenario(text, name=name, default_seed=_default_seed())
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.samples is not None:
        updates["sample_count"] = args.samples
    if args.fd_step is not None:
        updates["fd"] = dataclasses.replace(scn.fd, step=args.fd_step)
    tolerances = _parse_tolerances(args.tolerance)
    if tolerances:
        merged = dict(scn.tolerances)
        merged.update(tolerances)
        updates["tolerances"] = merged
    if forced_checks is not None:
        updates["checks"] = forced_checks
    if updates:
        scn = dataclasses.replace(scn, **updates)
    if forced_checks is not None and scn.immersion is None:
        raise UsageError(
            f"checks {list(forced_checks)} require an [immersion] section in the scenario"
        )
    return scn


def cmd_run(args, forced_checks=None) -> int:
    scn = _load_scenario_file(args.scenario, args, forced_checks)
    summary = run_scenario(scn)
    return _emit(summary, args.format)


def cmd_list(args) -> int:
    rows = []
    if not args.checks:
        rows.extend(("model", name) for name in list_structures())
        rows.extend(("immersion", name) for name in list_immersions())
    rows.extend(("checkname", name) for name in CHECK_NAMES)
    if args.format == "records":
        sys.stdout.write("".join(f"{kind}\t{name}\n" for kind, name in rows))
    else:
        kinds = {"model": "ambient models", "immersion": "immersions", "checkname": "checks"}
        current = None
        out = []
        for kind, name in rows:
            if kind != current:
                out.append(f"{kinds[kind]}:")
                current = kind
            out.append(f"  {name}")
        sys.stdout.write("\n".join(out) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slantlab",
        description="Numerical checks for slant submanifolds of Lorentzian "
        "almost contact manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("table", "records"), default="table")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--fd-step", type=float, default=None, dest="fd_step")
        p.add_argument(
            "--tolerance", action="append", metavar="NAME=X",
            help="override a per-check tolerance (repeatable)",
        )

    p_verify = sub.add_parser("verify-ambient", help="check a registry model")
    p_verify.add_argument("model")
    common(p_verify)

    for name, help_text in (
        ("run", "run a scenario file"),
        ("slant", "run a scenario with checks forced to {slant}"),
        ("curvature", "run a scenario with checks forced to {lemma41, theorem42}"),
    ):
        p_cmd = sub.add_parser(name, help=help_text)
        p_cmd.add_argument("scenario")
        common(p_cmd)

    p_list = sub.add_parser("list", help="list models, immersions, and checks")
    p_list.add_argument("--checks", action="store_true", help="only list check names")
    p_list.add_argument("--format", choices=("table", "records"), default="table")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify-ambient":
            return cmd_verify_ambient(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "slant":
            return cmd_run(args, forced_checks=("slant",))
        if args.command == "curvature":
            return cmd_run(args, forced_checks=("lemma41", "theorem42"))
        if args.command == "list":
            return cmd_list(args)
        parser.error(f"unknown command {args.command!r}")
    except (UsageError, ScenarioError, ParseError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SlantLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
