"""Download and verify the two benchmark tables.

Both tables are published as zip archives in the UCI repository.  The
fetcher downloads each archive, digs the relevant csv out (one archive
nests a second zip), stores it under a canonical name, and verifies the
result structurally: the header must match the built-in schema and the row
count the published record count.  The sha256 of each stored file is
printed so it can be pinned with --sha256 on later runs.
"""

from __future__ import annotations

import hashlib
import io
import urllib.error
import urllib.request
import zipfile
from pathlib import Path

from .errors import DataError
from .schemas import DATA_FILES, EXPECTED_ROWS, builtin_dataset, load_dataset

ARCHIVE_URLS = {
    "A": "https://archive.ics.uci.edu/static/public/320/student+performance.zip",
    "B": "https://archive.ics.uci.edu/static/public/697/predict+students+dropout+and+academic+success.zip",
}
ARCHIVE_MEMBERS = {"A": "student-mat.csv", "B": "data.csv"}


class FetchError(DataError):
    """Download or archive extraction failed."""


def _download(url: str, timeout: float) -> bytes:
    request = urllib.request.Request(url, headers={"User-Agent": "fedtab-fetch/0.1"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.read()
    except (urllib.error.URLError, OSError) as err:
        raise FetchError(f"download failed for {url}: {err}") from None


def _extract_member(archive: bytes, member_name: str) -> bytes:
    """Find a member by basename, descending one level into nested zips."""
    with zipfile.ZipFile(io.BytesIO(archive)) as zf:
        nested = []
        for info in zf.infolist():
            base = Path(info.filename).name
            if base == member_name:
                return zf.read(info)
            if base.endswith(".zip"):
                nested.append(info)
        for info in nested:
            try:
                return _extract_member(zf.read(info), member_name)
            except FetchError:
                continue
    raise FetchError(f"archive does not contain {member_name!r}")


def fetch_dataset(
    key: str,
    dest: str | Path,
    sha256: str | None = None,
    timeout: float = 60.0,
    report=print,
) -> Path:
    """Download one table into ``dest`` and verify it; returns the file path."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    target = dest / DATA_FILES[key]

    payload = _download(ARCHIVE_URLS[key], timeout)
    content = _extract_member(payload, ARCHIVE_MEMBERS[key])
    target.write_bytes(content)

    digest = hashlib.sha256(content).hexdigest()
    if sha256 is not None and digest != sha256.lower():
        target.unlink()
        raise FetchError(f"dataset {key}: sha256 mismatch: got {digest}, expected {sha256}")
    verify_dataset(key, dest)
    report(f"dataset {key}: wrote {target} ({len(content)} bytes, sha256 {digest})")
    return target


def verify_dataset(key: str, data_dir: str | Path) -> None:
    """Structural check: schema-compatible header and published row count."""
    spec = builtin_dataset(key, data_dir)
    raw = load_dataset(spec)
    if raw.n_rows != EXPECTED_ROWS[key]:
        raise FetchError(
            f"dataset {key}: expected {EXPECTED_ROWS[key]} rows, found {raw.n_rows}"
        )


def fetch_all(
    dest: str | Path,
    keys: tuple[str, ...] = ("A", "B"),
    pins: dict[str, str] | None = None,
    report=print,
) -> list[Path]:
    pins = pins or {}
    return [fetch_dataset(key, dest, pins.get(key), report=report) for key in keys]
