"""Built-in schemas for the two benchmark tables.

Dataset A is the secondary-school mathematics table: 395 records, 32
predictor columns (15 continuous, 17 categorical), and a final grade that
is binarized to pass / fail at 10 of 20 points.  Both earlier period grades
stay in as predictors.

Dataset B is the higher-education outcome table: 4424 records, 36 predictor
columns (35 continuous, one categorical) and a three-way target of Dropout,
Enrolled, or Graduate.  Its one categorical column is the integer-coded
marital status field; the remaining coded columns are ordinal enough that
they are treated as continuous.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .dataset import (
    KIND_CATEGORICAL,
    KIND_CONTINUOUS,
    KIND_TARGET,
    ColumnSpec,
    FeatureSchema,
    RawTable,
    binarize_grade_target,
    load_table,
)
from .errors import InvalidConfigError

GRADE_PASS_THRESHOLD = 10

_A_CATEGORICAL = (
    "school", "sex", "address", "famsize", "Pstatus", "Mjob", "Fjob", "reason",
    "guardian", "schoolsup", "famsup", "paid", "activities", "nursery", "higher",
    "internet", "romantic",
)
_A_CONTINUOUS = (
    "age", "Medu", "Fedu", "traveltime", "studytime", "failures", "famrel",
    "freetime", "goout", "Dalc", "Walc", "health", "absences", "G1", "G2",
)
# file column order, so loaded tables keep their familiar layout
_A_ORDER = (
    "school", "sex", "age", "address", "famsize", "Pstatus", "Medu", "Fedu",
    "Mjob", "Fjob", "reason", "guardian", "traveltime", "studytime", "failures",
    "schoolsup", "famsup", "paid", "activities", "nursery", "higher", "internet",
    "romantic", "famrel", "freetime", "goout", "Dalc", "Walc", "health",
    "absences", "G1", "G2", "G3",
)

_B_CATEGORICAL = ("Marital status",)
_B_CONTINUOUS = (
    "Application mode", "Application order", "Course",
    "Daytime/evening attendance", "Previous qualification",
    "Previous qualification (grade)", "Nacionality", "Mother's qualification",
    "Father's qualification", "Mother's occupation", "Father's occupation",
    "Admission grade", "Displaced", "Educational special needs", "Debtor",
    "Tuition fees up to date", "Gender", "Scholarship holder",
    "Age at enrollment", "International",
    "Curricular units 1st sem (credited)", "Curricular units 1st sem (enrolled)",
    "Curricular units 1st sem (evaluations)", "Curricular units 1st sem (approved)",
    "Curricular units 1st sem (grade)", "Curricular units 1st sem (without evaluations)",
    "Curricular units 2nd sem (credited)", "Curricular units 2nd sem (enrolled)",
    "Curricular units 2nd sem (evaluations)", "Curricular units 2nd sem (approved)",
    "Curricular units 2nd sem (grade)", "Curricular units 2nd sem (without evaluations)",
    "Unemployment rate", "Inflation rate", "GDP",
)
_B_ORDER = _B_CATEGORICAL + _B_CONTINUOUS + ("Target",)


def student_performance_schema() -> FeatureSchema:
    columns = []
    for name in _A_ORDER:
        if name == "G3":
            columns.append(ColumnSpec(name, KIND_TARGET))
        elif name in _A_CATEGORICAL:
            columns.append(ColumnSpec(name, KIND_CATEGORICAL))
        else:
            columns.append(ColumnSpec(name, KIND_CONTINUOUS))
    return FeatureSchema(tuple(columns), ("fail", "pass"), delimiter=";")


def academic_outcome_schema() -> FeatureSchema:
    columns = []
    for name in _B_ORDER:
        if name == "Target":
            columns.append(ColumnSpec(name, KIND_TARGET))
        elif name in _B_CATEGORICAL:
            columns.append(ColumnSpec(name, KIND_CATEGORICAL))
        else:
            columns.append(ColumnSpec(name, KIND_CONTINUOUS))
    return FeatureSchema(tuple(columns), ("Dropout", "Enrolled", "Graduate"), delimiter=";")


@dataclass(frozen=True)
class DatasetSpec:
    """Everything needed to load one dataset: key, file, schema, binarization."""

    key: str
    path: Path
    schema: FeatureSchema
    grade_column: str | None = None
    pass_threshold: int = GRADE_PASS_THRESHOLD
    expected_rows: int | None = None


DATASET_KEYS = ("A", "B")
DATA_FILES = {"A": "student-mat.csv", "B": "student-dropout.csv"}
EXPECTED_ROWS = {"A": 395, "B": 4424}


def builtin_dataset(key: str, data_dir: str | Path) -> DatasetSpec:
    if key == "A":
        return DatasetSpec(
            key="A",
            path=Path(data_dir) / DATA_FILES["A"],
            schema=student_performance_schema(),
            grade_column="G3",
            expected_rows=EXPECTED_ROWS["A"],
        )
    if key == "B":
        return DatasetSpec(
            key="B",
            path=Path(data_dir) / DATA_FILES["B"],
            schema=academic_outcome_schema(),
            expected_rows=EXPECTED_ROWS["B"],
        )
    raise InvalidConfigError(f"unknown dataset key {key!r}; expected one of {DATASET_KEYS}")


def load_dataset(spec: DatasetSpec) -> RawTable:
    """Load, and when a grade column is declared, binarize it to pass/fail."""
    raw = load_table(spec.path, spec.schema)
    if spec.grade_column is not None:
        raw = binarize_grade_target(raw, spec.grade_column, spec.pass_threshold)
    return raw
