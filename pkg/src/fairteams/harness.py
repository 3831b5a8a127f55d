"""Batch orchestration: solve methods, metrics, and experiment CSV output.

Reporting scale: y and per-group benefit are percentages (fraction x 100);
the group-variance column is fraction-scale variance x 10^4 so that it and
the benefit percentages move on comparable magnitudes. The objective column
stays on fraction scale, exactly as the optimizer sees it.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, replace

import numpy as np

from .baselines import GAParams, genetic_algorithm, uniform_kmeans
from .core import (Assignment, Instance, TaskSpec, compute_benefit_matrix,
                   group_benefits, objective, team_skill_sums)
from .datagen import generate_dataset, load_instance, preset_config
from .errors import ValidationError
from .initial import gmbf, random_init
from .refine import RefineConfig, fmhc
from .rng import derive_rng

METHODS = ("fern", "gmbf", "random", "umeans", "ga")

# salts keep each method's derived sub-run streams disjoint per seed
_STOCHASTIC_SALT = {"random": 1, "umeans": 2, "ga": 3}

METRIC_COLUMNS = ("n", "l_final", "pct_teams_met", "y_pct", "z_pct",
                  "objective", "runtime_ms")


@dataclass(frozen=True)
class MetricsRecord:
    dataset: str
    method: str
    seed: int | str
    n: float
    l_final: float
    pct_teams_met: float
    y_pct: float
    z_pct: float
    objective: float
    runtime_ms: float
    group_labels: tuple[str, ...]
    gben_pct: tuple[float, ...]

    def metric_values(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in METRIC_COLUMNS) + self.gben_pct


@dataclass(frozen=True)
class RunFailure:
    dataset: str
    method: str
    seed: int
    message: str


@dataclass(frozen=True)
class ExperimentResult:
    records: tuple[MetricsRecord, ...]
    aggregates: tuple[MetricsRecord, ...]
    failures: tuple[RunFailure, ...]


def evaluate_solution(instance: Instance, spec: TaskSpec,
                      assignment: Assignment, dataset: str = "",
                      method: str = "", seed: int | str = 0,
                      runtime_ms: float = 0.0) -> MetricsRecord:
    """Score one assignment; the objective value matches core.objective."""
    if assignment.n != instance.n:
        raise ValidationError("assignment size does not match the roster")
    b = compute_benefit_matrix(instance, spec.benefit_epsilon)
    breakdown = objective(instance, spec, assignment, b=b)
    sums = team_skill_sums(instance, assignment)
    met = np.all(sums >= spec.requirements, axis=1)
    gben = group_benefits(b, assignment, instance)
    return MetricsRecord(
        dataset=dataset, method=method, seed=seed,
        n=instance.n, l_final=assignment.n_teams,
        pct_teams_met=100.0 * float(met.sum()) / assignment.n_teams,
        y_pct=100.0 * breakdown.y, z_pct=1e4 * breakdown.z,
        objective=breakdown.f, runtime_ms=runtime_ms,
        group_labels=instance.group_labels,
        gben_pct=tuple(100.0 * v for v in gben))


def solve_instance(instance: Instance, spec: TaskSpec, method: str,
                   seed=0, team_count: int | None = None,
                   refine_config: RefineConfig | None = None,
                   ga_params: GAParams | None = None) -> Assignment:
    """Run one method end to end, including any prerequisite sizing run.

    Team counts when not overridden: random and umeans use the count a
    plain constructive run produces; ga uses the count of the full
    construct-plus-refine pipeline.
    """
    if method not in METHODS:
        raise ValidationError(
            f"unknown method {method!r}; expected one of {METHODS}")
    b = compute_benefit_matrix(instance, spec.benefit_epsilon)
    if method == "gmbf":
        return gmbf(instance, spec, b)
    if method == "fern":
        return fmhc(instance, spec, b, gmbf(instance, spec, b),
                    config=refine_config)
    if team_count is None:
        if method == "ga":
            team_count = fmhc(instance, spec, b, gmbf(instance, spec, b),
                              config=refine_config).n_teams
        else:
            team_count = gmbf(instance, spec, b).n_teams
    if method == "random":
        return random_init(instance.n, team_count, rng=seed)
    if method == "umeans":
        return uniform_kmeans(instance, team_count, rng=seed)
    return genetic_algorithm(instance, spec, b, team_count,
                             params=ga_params, rng=seed)


@dataclass(frozen=True)
class ExperimentConfig:
    """One dataset source x methods x seeds batch.

    Preset sources resample the dataset per seed; a roster source keeps the
    instance fixed and seeds only the stochastic methods. reps sub-runs are
    averaged into each stochastic method's per-seed row.
    """

    seeds: tuple[int, ...]
    methods: tuple[str, ...] = ("fern",)
    preset: str | None = "d1"
    roster: str | None = None
    dataset_name: str | None = None
    n_students: int = 100
    skill_dims: int = 2
    n_groups: int = 2
    reps: int = 10
    spec: TaskSpec | None = None
    team_count: int | None = None
    refine_config: RefineConfig | None = None
    ga_params: GAParams | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValidationError("seeds must be distinct")
        if not self.methods:
            raise ValidationError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ValidationError(f"unknown method {m!r}")
        if len(set(self.methods)) != len(self.methods):
            raise ValidationError("methods must be distinct")
        if (self.preset is None) == (self.roster is None):
            raise ValidationError("exactly one of preset/roster is required")
        if self.reps < 1:
            raise ValidationError("reps must be at least 1")

    @property
    def label(self) -> str:
        if self.dataset_name:
            return self.dataset_name
        if self.preset is not None:
            return self.preset.lower()
        stem = str(self.roster).rsplit("/", 1)[-1]
        return stem.rsplit(".", 1)[0]


def default_spec(k: int) -> TaskSpec:
    """Requirement 2 per skill, gamma = delta = 1, strict benefit."""
    return TaskSpec(requirements=np.full(k, 2.0))


def _mean_record(rows: list[MetricsRecord], seed: int | str) -> MetricsRecord:
    values = np.array([r.metric_values() for r in rows])
    mean = values.mean(axis=0)
    base = len(METRIC_COLUMNS)
    return replace(rows[0], seed=seed,
                   **dict(zip(METRIC_COLUMNS, mean[:base])),
                   gben_pct=tuple(mean[base:]))


def _se_record(rows: list[MetricsRecord]) -> MetricsRecord:
    values = np.array([r.metric_values() for r in rows])
    if len(rows) > 1:
        se = values.std(axis=0, ddof=1) / np.sqrt(len(rows))
    else:
        se = np.zeros(values.shape[1])
    base = len(METRIC_COLUMNS)
    return replace(rows[0], seed="se",
                   **dict(zip(METRIC_COLUMNS, se[:base])),
                   gben_pct=tuple(se[base:]))


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Per-seed records plus per-method mean and standard-error rows.

    A failed run is recorded with its identity and the batch continues.
    """
    spec = config.spec
    fixed_instance = None
    if config.roster is not None:
        fixed_instance = load_instance(config.roster)
    if spec is None:
        k = fixed_instance.k if fixed_instance is not None \
            else config.skill_dims
        spec = default_spec(k)

    records: list[MetricsRecord] = []
    failures: list[RunFailure] = []
    for seed in config.seeds:
        if fixed_instance is not None:
            instance = fixed_instance
        else:
            instance = generate_dataset(
                preset_config(config.preset, config.n_students,
                              skill_dims=config.skill_dims,
                              n_groups=config.n_groups), seed=seed)
        for method in config.methods:
            try:
                records.append(_run_cell(config, spec, instance, method,
                                         seed))
            except (ValidationError, ValueError, ArithmeticError) as exc:
                failures.append(RunFailure(config.label, method, seed,
                                           f"{type(exc).__name__}: {exc}"))
    records.sort(key=lambda r: (r.dataset, r.method, r.seed))

    aggregates: list[MetricsRecord] = []
    for method in sorted(set(r.method for r in records)):
        rows = [r for r in records if r.method == method]
        aggregates.append(_mean_record(rows, "mean"))
        aggregates.append(_se_record(rows))
    return ExperimentResult(tuple(records), tuple(aggregates),
                            tuple(failures))


def _run_cell(config: ExperimentConfig, spec: TaskSpec, instance: Instance,
              method: str, seed: int) -> MetricsRecord:
    """One (method, seed) row; stochastic methods average reps sub-runs."""
    if method in _STOCHASTIC_SALT:
        sub_rows = []
        for rep in range(config.reps):
            rng = derive_rng(seed, _STOCHASTIC_SALT[method], rep)
            sub_rows.append(_timed_run(config, spec, instance, method,
                                       seed, rng))
        return _mean_record(sub_rows, seed)
    return _timed_run(config, spec, instance, method, seed, seed)


def _timed_run(config, spec, instance, method, seed, rng) -> MetricsRecord:
    start = time.perf_counter()
    assignment = solve_instance(instance, spec, method, seed=rng,
                                team_count=config.team_count,
                                refine_config=config.refine_config,
                                ga_params=config.ga_params)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return evaluate_solution(instance, spec, assignment,
                             dataset=config.label, method=method, seed=seed,
                             runtime_ms=elapsed_ms)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def metrics_header(group_labels: tuple[str, ...]) -> list[str]:
    return (["dataset", "method", "seed", "n", "l_final", "pct_teams_met",
             "y_pct", "z_pct", "objective", "runtime_ms"]
            + [f"gben_{label}" for label in group_labels])


def write_metrics_csv(records, path_or_file, aggregates=()) -> None:
    """Plain CSV, floats via repr so identical runs emit identical bytes."""
    rows = list(records) + list(aggregates)
    if not rows:
        raise ValidationError("no records to write")
    labels = rows[0].group_labels
    for r in rows:
        if r.group_labels != labels:
            raise ValidationError(
                "all records in one CSV must share group labels")

    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(metrics_header(labels))
        for r in rows:
            writer.writerow(
                [r.dataset, r.method, _format_cell(r.seed)]
                + [_format_cell(v) for v in r.metric_values()])

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file,
                                                         "__fspath__"):
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)
    else:
        emit(path_or_file)


def metrics_csv_text(records, aggregates=()) -> str:
    buf = io.StringIO()
    write_metrics_csv(records, buf, aggregates=aggregates)
    return buf.getvalue()
