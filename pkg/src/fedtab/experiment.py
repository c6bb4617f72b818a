"""Experiment driver: the four-condition grid and the results table.

Conditions:

- central_clean: pool every client's training split, train once, evaluate
  on the pooled test split.
- central_poisoned: the same, but a share of the pooled training labels is
  flipped first.
- fl_clean: federated rounds over the clients; the reported figure is the
  mean of the final-round evaluation across the configured round budgets.
- fl_poisoned: federated with the malicious clients flipping their local
  training labels before round one.

Total optimization effort is held fixed across budgets: a budget of R
rounds trains round(epoch_budget / R) local epochs per round.  Every
derived seed folds the master seed in, so one master seed pins the whole
grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .attack import AttackConfig, flip_labels
from .config import CONDITIONS, ExperimentConfig
from .dataset import EncodedDataset, RawTable, build_client_partitions, concat_datasets
from .errors import InvalidConfigError
from .federation import FederationConfig, RoundLog, evaluate_global, run_federated
from .metrics import MetricsReport
from .models import Model, train_forest, train_logreg, train_svm
from .schemas import DatasetSpec, builtin_dataset, load_dataset

METRIC_NAMES = ("Accuracy", "Recall", "F1-Score", "AUCROC")
MODEL_LABELS = {"forest": "Random forest", "svm": "SVM", "logistic": "Logistic regression"}
_METRIC_FIELDS = {
    "Accuracy": "accuracy_pct",
    "Recall": "recall",
    "F1-Score": "f1",
    "AUCROC": "auc_roc",
}
_DECIMALS = {"Accuracy": 2, "Recall": 4, "F1-Score": 4, "AUCROC": 4}


def epochs_for_budget(epoch_budget: int, rounds: int) -> int:
    """Local epochs per round keeping rounds * epochs near the budget."""
    return max(1, int(np.floor(epoch_budget / rounds + 0.5)))


def mean_reports(reports: list[MetricsReport]) -> MetricsReport:
    if not reports:
        raise InvalidConfigError("cannot average zero reports")
    sizes = {r.n_samples for r in reports}
    if len(sizes) != 1:
        raise ValueError(f"averaging reports over different test sizes: {sorted(sizes)}")
    return MetricsReport(
        accuracy_pct=float(np.mean([r.accuracy_pct for r in reports])),
        recall=float(np.mean([r.recall for r in reports])),
        f1=float(np.mean([r.f1 for r in reports])),
        auc_roc=float(np.mean([r.auc_roc for r in reports])),
        n_samples=reports[0].n_samples,
    )


@dataclass(frozen=True)
class ConditionResult:
    """Headline report plus, for federated runs, the per-budget breakdown."""

    report: MetricsReport
    per_budget: Mapping[int, MetricsReport]
    logs: Mapping[int, RoundLog]


def _train_central(
    train: EncodedDataset, cfg: ExperimentConfig, model_kind: str, master_seed: int
) -> Model:
    train_cfg = replace(
        cfg.train_config(model_kind), seed=master_seed, epochs=cfg.epoch_budget
    )
    if model_kind == "forest":
        return train_forest(train, train_cfg)
    if model_kind == "logistic":
        return train_logreg(train, train_cfg)
    return train_svm(train, train_cfg)


def _attack_for(cfg: ExperimentConfig, master_seed: int) -> AttackConfig:
    return AttackConfig(
        flip_fraction=cfg.flip_fraction,
        malicious_clients=frozenset(cfg.malicious_clients),
        seed=cfg.attack_seed ^ master_seed,
    )


def run_condition_detailed(
    cfg: ExperimentConfig,
    dataset: DatasetSpec,
    raw: RawTable,
    model_kind: str,
    condition: str,
    master_seed: int,
) -> ConditionResult:
    if condition not in CONDITIONS:
        raise InvalidConfigError(f"unknown condition {condition!r}")

    if condition.startswith("central"):
        partitions = build_client_partitions(
            raw, dataset.schema, cfg.n_clients, cfg.test_fraction, master_seed, "pooled"
        )
        pooled_train = concat_datasets([p.train for p in partitions])
        if condition == "central_poisoned":
            attack = replace(_attack_for(cfg, master_seed), malicious_clients=frozenset())
            labels, _ = flip_labels(pooled_train.labels, pooled_train.n_classes, attack)
            pooled_train = EncodedDataset(
                pooled_train.features, labels, pooled_train.n_classes, pooled_train.feature_names
            )
        model = _train_central(pooled_train, cfg, model_kind, master_seed)
        return ConditionResult(evaluate_global(model, partitions), {}, {})

    partitions = build_client_partitions(
        raw, dataset.schema, cfg.n_clients, cfg.test_fraction, master_seed, "client"
    )
    attack = _attack_for(cfg, master_seed) if condition == "fl_poisoned" else None
    per_budget: dict[int, MetricsReport] = {}
    logs: dict[int, RoundLog] = {}
    for budget in cfg.round_budgets:
        fed_cfg = FederationConfig(
            model_kind=model_kind,
            rounds=budget,
            local_epochs=epochs_for_budget(cfg.epoch_budget, budget),
            train_cfg=cfg.train_config(model_kind),
            n_clients=cfg.n_clients,
            seed=master_seed,
        )
        _, log = run_federated(partitions, fed_cfg, attack)
        logs[budget] = log
        if cfg.fl_average == "final":
            per_budget[budget] = log.records[-1].global_metrics
        else:
            per_budget[budget] = mean_reports([r.global_metrics for r in log.records])
    report = mean_reports([per_budget[b] for b in cfg.round_budgets])
    return ConditionResult(report, per_budget, logs)


def run_condition(
    cfg: ExperimentConfig,
    dataset: DatasetSpec,
    model_kind: str,
    condition: str,
    master_seed: int,
    raw: RawTable | None = None,
) -> MetricsReport:
    """Run one (dataset, model, condition) cell for one master seed."""
    if raw is None:
        raw = load_dataset(dataset)
    return run_condition_detailed(cfg, dataset, raw, model_kind, condition, master_seed).report


@dataclass(frozen=True)
class ResultRow:
    """One line of the results table; cells hold display-rounded values."""

    dataset: str
    model: str
    metric: str
    cells: tuple[float | None, ...]  # one per results column, in order


RESULT_COLUMNS = (
    "Standard ML",
    "FL",
    "Difference",
    "Standard Poisoned",
    "Poisoned FL",
    "Differences",
)
_CONVENTIONS = (
    "Difference = Standard ML - FL",
    "Differences = |Poisoned FL - Standard Poisoned|",
)


@dataclass(frozen=True)
class ResultsTable:
    rows: tuple[ResultRow, ...]

    def cell(self, dataset: str, model: str, metric: str, column: str) -> float | None:
        j = RESULT_COLUMNS.index(column)
        for row in self.rows:
            if (row.dataset, row.model, row.metric) == (dataset, model, metric):
                return row.cells[j]
        raise KeyError((dataset, model, metric))


def _round_cell(value: float | None, metric: str) -> float | None:
    if value is None:
        return None
    return round(value, _DECIMALS[metric])


def build_results_table(
    cell_reports: Mapping[tuple[str, str, str], MetricsReport],
    datasets: tuple[str, ...],
    models: tuple[str, ...],
) -> ResultsTable:
    """Arrange per-condition reports into the six-column results layout.

    Differences are recomputed from the rounded condition columns, so the
    printed table is internally consistent at display precision.
    """
    rows = []
    for ds in datasets:
        for model in models:
            label = MODEL_LABELS[model]
            for metric in METRIC_NAMES:
                field_name = _METRIC_FIELDS[metric]

                def value_of(condition: str) -> float | None:
                    report = cell_reports.get((ds, model, condition))
                    return None if report is None else getattr(report, field_name)

                standard = _round_cell(value_of("central_clean"), metric)
                fl = _round_cell(value_of("fl_clean"), metric)
                standard_p = _round_cell(value_of("central_poisoned"), metric)
                fl_p = _round_cell(value_of("fl_poisoned"), metric)
                diff = None if standard is None or fl is None else _round_cell(standard - fl, metric)
                diff_p = (
                    None
                    if standard_p is None or fl_p is None
                    else _round_cell(abs(fl_p - standard_p), metric)
                )
                rows.append(
                    ResultRow(ds, label, metric, (standard, fl, diff, standard_p, fl_p, diff_p))
                )
    return ResultsTable(tuple(rows))


def run_suite(
    cfg: ExperimentConfig,
    datasets: Mapping[str, DatasetSpec] | None = None,
    progress: Callable[[str], None] | None = None,
) -> ResultsTable:
    """Run the whole grid: dataset x model x condition, averaged over seeds.

    ``datasets`` may inject pre-built specs (tests do); by default the
    built-in catalog plus cfg.data_dir resolves them.  Writes the results
    table and optional round log as configured.
    """
    specs = dict(datasets) if datasets is not None else {
        key: builtin_dataset(key, cfg.data_dir) for key in cfg.datasets
    }
    raw_cache: dict[str, RawTable] = {}
    cell_reports: dict[tuple[str, str, str], MetricsReport] = {}
    log_lines: list[str] = []
    for key in cfg.datasets:
        spec = specs[key]
        raw = raw_cache.setdefault(key, load_dataset(spec))
        for model in cfg.models:
            for condition in cfg.conditions:
                if progress is not None:
                    progress(f"{key}/{model}/{condition}")
                seed_reports = []
                for seed in cfg.seeds:
                    detail = run_condition_detailed(cfg, spec, raw, model, condition, seed)
                    seed_reports.append(detail.report)
                    if cfg.output.round_log is not None:
                        log_lines.extend(
                            _round_log_lines(key, model, condition, seed, detail)
                        )
                cell_reports[(key, model, condition)] = mean_reports(seed_reports)

    table = build_results_table(cell_reports, cfg.datasets, cfg.models)
    if cfg.output.path is not None:
        emit_report(table, cfg.output.format, cfg.output.path)
    if cfg.output.round_log is not None:
        Path(cfg.output.round_log).write_text(
            "".join(line + "\n" for line in log_lines), encoding="utf-8"
        )
    return table


def _round_log_lines(
    dataset: str, model: str, condition: str, seed: int, detail: ConditionResult
) -> list[str]:
    lines = []
    for budget in sorted(detail.logs):
        log = detail.logs[budget]
        base = {"dataset": dataset, "model": model, "condition": condition,
                "seed": seed, "budget": budget}
        for client_id in sorted(log.flip_masks):
            mask = log.flip_masks[client_id]
            lines.append(json.dumps({
                **base, "type": "flips", "client": client_id,
                "flipped_rows": np.flatnonzero(mask).tolist(),
            }, sort_keys=True))
        for record in log.records:
            report = record.global_metrics
            lines.append(json.dumps({
                **base, "type": "round", "round": record.round_index,
                "train_counts": list(record.train_counts),
                "local_train_accuracy": list(record.local_train_accuracy),
                "global": {
                    "accuracy_pct": report.accuracy_pct, "recall": report.recall,
                    "f1": report.f1, "auc_roc": report.auc_roc,
                    "n_samples": report.n_samples,
                },
            }, sort_keys=True))
    return lines


def _format_cell(value: float | None, metric: str) -> str:
    if value is None:
        return ""
    return f"{value:.{_DECIMALS[metric]}f}"


def emit_report(table: ResultsTable, fmt: str, path: str | Path | None = None) -> str:
    """Render the results table; byte-identical output for equal tables."""
    if fmt == "delimited":
        lines = [f"# {c}" for c in _CONVENTIONS]
        lines.append(",".join(("Dataset", "Model", "Metric") + RESULT_COLUMNS))
        for row in table.rows:
            cells = [_format_cell(v, row.metric) for v in row.cells]
            lines.append(",".join([row.dataset, row.model, row.metric] + cells))
        text = "\n".join(lines) + "\n"
    elif fmt == "structured":
        payload = {
            "conventions": list(_CONVENTIONS),
            "columns": list(RESULT_COLUMNS),
            "rows": [
                {
                    "dataset": row.dataset,
                    "model": row.model,
                    "metric": row.metric,
                    "values": {
                        col: row.cells[j] for j, col in enumerate(RESULT_COLUMNS)
                    },
                }
                for row in table.rows
            ],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif fmt == "human":
        headers = ("Dataset", "Model", "Metric") + RESULT_COLUMNS
        body = [
            (row.dataset, row.model, row.metric)
            + tuple(_format_cell(v, row.metric) for v in row.cells)
            for row in table.rows
        ]
        widths = [
            max(len(headers[j]), *(len(r[j]) for r in body)) if body else len(headers[j])
            for j in range(len(headers))
        ]
        sep = "  "
        lines = [f"# {c}" for c in _CONVENTIONS]
        lines.append(sep.join(h.ljust(widths[j]) for j, h in enumerate(headers)).rstrip())
        lines.append(sep.join("-" * widths[j] for j in range(len(headers))))
        for r in body:
            lines.append(sep.join(r[j].ljust(widths[j]) for j in range(len(headers))).rstrip())
        text = "\n".join(lines) + "\n"
    else:
        raise InvalidConfigError(f"unknown report format {fmt!r}")

    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_report(text: str) -> ResultsTable:
    """Parse a delimited report back into a table (inverse of emit_report)."""
    rows = []
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise InvalidConfigError("report has no header line")
    header = lines[0].split(",")
    expected = list(("Dataset", "Model", "Metric") + RESULT_COLUMNS)
    if header != expected:
        raise InvalidConfigError(f"unexpected report header: {header}")
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(expected):
            raise InvalidConfigError(f"report line has {len(parts)} fields: {ln!r}")
        dataset, model, metric = parts[:3]
        cells = tuple(float(p) if p else None for p in parts[3:])
        rows.append(ResultRow(dataset, model, metric, cells))
    return ResultsTable(tuple(rows))
