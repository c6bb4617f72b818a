"""Shared fixtures: synthetic tables on disk and real-data discovery.

The acceptance tests that check reference results need the two real
benchmark tables.  They are looked up in $FEDTAB_DATA_DIR, falling back to
./data; when absent, those tests skip with a pointer to `fedtab
fetch-data`.
"""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from _synth import (
    grades_dataset_spec,
    outcomes_dataset_spec,
    write_grades_csv,
    write_outcomes_csv,
)
from fedtab.schemas import DATA_FILES


def real_data_dir() -> Path:
    return Path(os.environ.get("FEDTAB_DATA_DIR", "data"))


def missing_real_data() -> list[str]:
    return [key for key, name in DATA_FILES.items() if not (real_data_dir() / name).is_file()]


requires_real_data = pytest.mark.skipif(
    bool(missing_real_data()),
    reason=(
        f"benchmark tables {missing_real_data()} not found under {real_data_dir()}/ "
        "(run `fedtab fetch-data --dest data` or set FEDTAB_DATA_DIR)"
    ),
)


@pytest.fixture(scope="session")
def grades_spec(tmp_path_factory):
    path = tmp_path_factory.mktemp("synth") / "grades.csv"
    write_grades_csv(path)
    return grades_dataset_spec(path)


@pytest.fixture(scope="session")
def outcomes_spec(tmp_path_factory):
    path = tmp_path_factory.mktemp("synth") / "outcomes.csv"
    write_outcomes_csv(path)
    return outcomes_dataset_spec(path)
