"""Command-line front end.

Subcommands: generate (synthetic roster), solve (one method on a roster),
evaluate (score an existing assignment), experiment (methods x seeds batch
with mean/standard-error rows).

Every option can also come from a flat key=value config file passed with
--config; explicit command-line flags win over config values, which win
over built-in defaults. Exit codes: 0 success, 1 validation error, 2 I/O
error (argparse reports usage errors with its own nonzero exit).
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from .baselines import GAParams
from .core import Assignment, Instance, TaskSpec, compact_assignment
from .datagen import (PRESETS, generate_dataset, load_instance,
                      preset_config, save_roster)
from .errors import ValidationError
from .harness import (METHODS, ExperimentConfig, evaluate_solution,
                      metrics_csv_text, run_experiment, solve_instance,
                      write_metrics_csv)
from .refine import RefineConfig


def _parse_requirements(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(
            f"requirements must be comma-separated numbers, got {text!r}"
        ) from None
    return values


def _parse_seeds(text: str) -> tuple[int, ...]:
    """Comma-separated ints; a..b expands to the inclusive range."""
    seeds: list[int] = []
    for token in text.split(","):
        token = token.strip()
        try:
            if ".." in token:
                lo, hi = token.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValidationError(f"empty seed range {token!r}")
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(token))
        except ValueError:
            raise ValidationError(f"bad seed token {token!r}") from None
    return tuple(seeds)


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ValidationError(
                f"unknown method {m!r}; expected one of {METHODS}")
    return methods


# dest -> (converter, default); the config file uses the same keys
_COMMON_SPEC_OPTS = {
    "requirements": (_parse_requirements, None),
    "gamma": (float, 1.0),
    "delta": (float, 1.0),
    "benefit_epsilon": (float, 0.0),
}
_OPTS = {
    "generate": {
        "preset": (str, "d1"),
        "n": (int, 100),
        "skills": (int, 2),
        "groups": (int, 2),
        "seed": (int, 0),
        "out": (str, "roster.csv"),
    },
    "solve": {
        **_COMMON_SPEC_OPTS,
        "roster": (str, None),
        "method": (str.lower, "fern"),
        "seed": (int, 0),
        "team_count": (int, None),
        "gain_epsilon": (float, 1e-4),
        "assignment_out": (str, "assignment.csv"),
    },
    "evaluate": {
        **_COMMON_SPEC_OPTS,
        "roster": (str, None),
        "assignment": (str, None),
        "seed": (int, 0),
    },
    "experiment": {
        **_COMMON_SPEC_OPTS,
        "preset": (str, None),
        "roster": (str, None),
        "methods": (_parse_methods, ("fern",)),
        "seeds": (_parse_seeds, (0,)),
        "reps": (int, 10),
        "n": (int, 100),
        "skills": (int, 2),
        "groups": (int, 2),
        "team_count": (int, None),
        "gain_epsilon": (float, 1e-4),
        "out": (str, "metrics.csv"),
    },
}


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(
                    f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge CLI > config file > defaults for one subcommand."""
    config = _load_config(args.config) if args.config else {}
    specs = _OPTS[command]
    unknown = set(config) - set(specs)
    if unknown:
        raise ValidationError(
            f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for dest, (convert, default) in specs.items():
        cli_value = getattr(args, dest)
        if cli_value is not None:
            out[dest] = cli_value
        elif dest in config:
            out[dest] = convert(config[dest])
        else:
            out[dest] = default
    return out


def _build_task_spec(k: int, opts: dict) -> TaskSpec:
    reqs = opts["requirements"]
    if reqs is None:
        reqs = (2.0,) * k
    elif len(reqs) == 1 and k > 1:
        reqs = reqs * k
    elif len(reqs) != k:
        raise ValidationError(
            f"expected {k} requirement values, got {len(reqs)}")
    return TaskSpec(requirements=reqs, gamma=opts["gamma"],
                    delta=opts["delta"],
                    benefit_epsilon=opts["benefit_epsilon"])


def write_assignment(instance: Instance, assignment: Assignment,
                     path) -> None:
    """Assignment CSV: student_id,team_id in roster order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["student_id", "team_id"])
        for i in range(instance.n):
            writer.writerow([instance.student_ids[i],
                             int(assignment.team_of[i])])


def load_assignment(path, instance: Instance) -> Assignment:
    """Parse an assignment CSV; every roster student exactly once."""
    index = {sid: i for i, sid in enumerate(instance.student_ids)}
    team_of = np.full(instance.n, -1, dtype=np.int64)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty assignment file") from None
        if header != ["student_id", "team_id"]:
            raise ValidationError(
                f"{path}: header must be student_id,team_id")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValidationError(
                    f"{path}:{line_no}: expected 2 fields, got {len(row)}")
            sid = row[0].strip()
            if sid not in index:
                raise ValidationError(
                    f"{path}:{line_no}: unknown student_id {sid!r}")
            if team_of[index[sid]] != -1:
                raise ValidationError(
                    f"{path}:{line_no}: duplicate student_id {sid!r}")
            try:
                team_of[index[sid]] = int(row[1])
            except ValueError:
                raise ValidationError(
                    f"{path}:{line_no}: team_id must be an integer") from None
    missing = [sid for sid, i in index.items() if team_of[i] == -1]
    if missing:
        raise ValidationError(
            f"{path}: no assignment for {', '.join(missing[:5])}"
            + ("..." if len(missing) > 5 else ""))
    return compact_assignment(team_of)


def _cmd_generate(args) -> int:
    opts = _resolve(args, "generate")
    config = preset_config(opts["preset"], opts["n"],
                           skill_dims=opts["skills"],
                           n_groups=opts["groups"])
    instance = generate_dataset(config, seed=opts["seed"])
    save_roster(instance, opts["out"])
    print(f"wrote {instance.n} students to {opts['out']}")
    return 0


def _dataset_label(roster_path: str) -> str:
    stem = roster_path.replace("\\", "/").rsplit("/", 1)[-1]
    return stem.rsplit(".", 1)[0]


def _cmd_solve(args) -> int:
    opts = _resolve(args, "solve")
    if not opts["roster"]:
        raise ValidationError("solve requires --roster")
    if opts["method"] not in METHODS:
        raise ValidationError(
            f"unknown method {opts['method']!r}; expected one of {METHODS}")
    instance = load_instance(opts["roster"])
    spec = _build_task_spec(instance.k, opts)
    refine_config = RefineConfig(gain_epsilon=opts["gain_epsilon"])
    start = time.perf_counter()
    assignment = solve_instance(instance, spec, opts["method"],
                                seed=opts["seed"],
                                team_count=opts["team_count"],
                                refine_config=refine_config)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    write_assignment(instance, assignment, opts["assignment_out"])
    record = evaluate_solution(instance, spec, assignment,
                               dataset=_dataset_label(opts["roster"]),
                               method=opts["method"], seed=opts["seed"],
                               runtime_ms=elapsed_ms)
    sys.stdout.write(metrics_csv_text([record]))
    return 0


def _cmd_evaluate(args) -> int:
    opts = _resolve(args, "evaluate")
    if not opts["roster"] or not opts["assignment"]:
        raise ValidationError("evaluate requires --roster and --assignment")
    instance = load_instance(opts["roster"])
    spec = _build_task_spec(instance.k, opts)
    assignment = load_assignment(opts["assignment"], instance)
    record = evaluate_solution(instance, spec, assignment,
                               dataset=_dataset_label(opts["roster"]),
                               method="evaluate", seed=opts["seed"],
                               runtime_ms=0.0)
    sys.stdout.write(metrics_csv_text([record]))
    return 0


def _cmd_experiment(args) -> int:
    opts = _resolve(args, "experiment")
    if bool(opts["preset"]) == bool(opts["roster"]):
        raise ValidationError(
            "experiment requires exactly one of --preset or --roster")
    skill_dims = opts["skills"]
    if opts["roster"]:
        skill_dims = load_instance(opts["roster"]).k
    spec = _build_task_spec(skill_dims, opts)
    config = ExperimentConfig(
        seeds=opts["seeds"], methods=opts["methods"],
        preset=opts["preset"], roster=opts["roster"],
        n_students=opts["n"], skill_dims=opts["skills"],
        n_groups=opts["groups"], reps=opts["reps"], spec=spec,
        team_count=opts["team_count"],
        refine_config=RefineConfig(gain_epsilon=opts["gain_epsilon"]))
    result = run_experiment(config)
    if result.records:
        write_metrics_csv(result.records, opts["out"],
                          aggregates=result.aggregates)
        print(f"wrote {len(result.records)} rows "
              f"(+{len(result.aggregates)} aggregate) to {opts['out']}")
    for failure in result.failures:
        print(f"failed: {failure.dataset} {failure.method} "
              f"seed={failure.seed}: {failure.message}", file=sys.stderr)
    return 1 if result.failures else 0


def _add_spec_flags(parser):
    parser.add_argument("--requirements", type=_parse_requirements,
                        metavar="R1,R2,...",
                        help="per-skill requirement sums; a single value "
                             "is broadcast to every skill (default 2)")
    parser.add_argument("--gamma", type=float,
                        help="weight of average benefit (default 1)")
    parser.add_argument("--delta", type=float,
                        help="weight of group-benefit variance (default 1)")
    parser.add_argument("--benefit-epsilon", type=float,
                        help="margin a teammate must exceed in some skill "
                             "to count as beneficial (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairteams",
        description="Skill-requirement team formation with per-group "
                    "benefit balancing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a synthetic roster CSV")
    p.add_argument("--preset", type=str.lower, choices=sorted(PRESETS),
                   help="difficulty preset (default d1)")
    p.add_argument("--n", type=int, help="number of students (default 100)")
    p.add_argument("--skills", type=int, help="skill dimensions (default 2)")
    p.add_argument("--groups", type=int,
                   help="number of protected groups (default 2)")
    p.add_argument("--seed", type=int, help="generation seed (default 0)")
    p.add_argument("--out", help="output roster path (default roster.csv)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="form teams for one roster")
    p.add_argument("--roster", help="input roster CSV")
    p.add_argument("--method", choices=METHODS, help="default fern")
    p.add_argument("--seed", type=int,
                   help="seed for stochastic methods (default 0)")
    p.add_argument("--team-count", type=int,
                   help="override the team count for random/umeans/ga")
    p.add_argument("--gain-epsilon", type=float,
                   help="smallest pass gain the refiner commits "
                        "(default 1e-4)")
    p.add_argument("--assignment-out",
                   help="output assignment path (default assignment.csv)")
    _add_spec_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("evaluate", help="score an existing assignment")
    p.add_argument("--roster", help="input roster CSV")
    p.add_argument("--assignment", help="assignment CSV to score")
    p.add_argument("--seed", type=int,
                   help="seed recorded in the metrics row (default 0)")
    _add_spec_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="run a methods x seeds batch")
    p.add_argument("--preset", type=str.lower, choices=sorted(PRESETS),
                   help="resample this preset per seed")
    p.add_argument("--roster", help="fixed roster CSV instead of a preset")
    p.add_argument("--methods", type=_parse_methods, metavar="M1,M2,...",
                   help=f"subset of {','.join(METHODS)} (default fern)")
    p.add_argument("--seeds", type=_parse_seeds, metavar="S1,S2|A..B",
                   help="seed list; A..B is inclusive (default 0)")
    p.add_argument("--reps", type=int,
                   help="sub-runs averaged per seed for stochastic methods "
                        "(default 10)")
    p.add_argument("--n", type=int, help="students per dataset (default 100)")
    p.add_argument("--skills", type=int, help="skill dimensions (default 2)")
    p.add_argument("--groups", type=int, help="protected groups (default 2)")
    p.add_argument("--team-count", type=int,
                   help="override the team count for random/umeans/ga")
    p.add_argument("--gain-epsilon", type=float)
    p.add_argument("--out", help="metrics CSV path (default metrics.csv)")
    _add_spec_flags(p)
    p.set_defaults(func=_cmd_experiment)

    for sp in sub.choices.values():
        sp.add_argument("--config",
                        help="key=value file; flags override its entries")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
