"""Dataset and result persistence.

Two dataset formats:

* SEGF, a little-endian binary layout: magic b"SEGF", u16 version (1),
  u32 dimension d, u64 record count, then per record a u32 raw label
  followed by d IEEE-754 32-bit floats. Round trips are bit-exact.
* CSV with header ``label,f0,...,f{d-1}``; values are written with 9
  significant digits, which round-trips 32-bit float payloads.

Labels are remapped to dense [0, K) at load; the original labels are kept
in ``LabeledDataset.label_names``. Result objects are saved as JSON (with a
config echo, so artifacts are self-describing) or flat CSV; repeated saves
of the same object are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path

import numpy as np

from .core import LabeledDataset
from .errors import ConfigError, DimensionError, EmptyInputError, FormatError
from .harness import AccuracyTable, ProbEstimate
from .models import derive_rng

SEGF_MAGIC = b"SEGF"
SEGF_VERSION = 1
_CSV_FLOAT_FMT = "%.9g"


def save_dataset(ds: LabeledDataset, path: str | Path, fmt: str = "segf") -> None:
    path = Path(path)
    if fmt == "segf":
        _write_segf(ds, path)
    elif fmt == "csv":
        _write_csv(ds, path)
    else:
        raise FormatError(f"unknown dataset format {fmt!r}")


def load_dataset(path: str | Path) -> LabeledDataset:
    """Load a dataset, auto-detecting SEGF by magic bytes, else CSV."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) == 0:
        raise EmptyInputError(f"{path} is empty")
    if raw[:4] == SEGF_MAGIC:
        return _read_segf(raw, path)
    return _read_csv(raw, path)


def _raw_label(ds: LabeledDataset, i: int):
    return ds.label_names[ds.labels[i]] if ds.label_names else int(ds.labels[i])


def _write_segf(ds: LabeledDataset, path: Path) -> None:
    count = len(ds.labels)
    values = ds.vectors.astype("<f4")
    with path.open("wb") as fh:
        fh.write(SEGF_MAGIC)
        fh.write(struct.pack("<HIQ", SEGF_VERSION, ds.d, count))
        for i in range(count):
            raw = _raw_label(ds, i)
            fh.write(struct.pack("<I", int(raw)))
            fh.write(values[i].tobytes())


def _read_segf(raw: bytes, path: Path) -> LabeledDataset:
    header = struct.calcsize("<HIQ")
    if len(raw) < 4 + header:
        raise FormatError(f"{path}: truncated SEGF header")
    version, d, count = struct.unpack_from("<HIQ", raw, 4)
    if version != SEGF_VERSION:
        raise FormatError(f"{path}: unsupported SEGF version {version}")
    if count == 0:
        raise EmptyInputError(f"{path}: SEGF file holds no records")
    record = 4 + 4 * d
    body = raw[4 + header :]
    if len(body) != count * record:
        raise FormatError(
            f"{path}: expected {count} records of {record} bytes, got {len(body)} bytes"
        )
    rows = np.frombuffer(body, dtype=np.uint8).reshape(count, record)
    raw_labels = rows[:, :4].copy().view("<u4").ravel()
    vectors = rows[:, 4:].copy().view("<f4").reshape(count, d).astype(np.float64)
    return _remap(vectors, list(map(int, raw_labels)))


def _write_csv(ds: LabeledDataset, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"f{i}" for i in range(ds.d)])
        for i in range(len(ds.labels)):
            writer.writerow(
                [_raw_label(ds, i)] + [_CSV_FLOAT_FMT % v for v in ds.vectors[i]]
            )


def _read_csv(raw: bytes, path: Path) -> LabeledDataset:
    reader = csv.reader(io.StringIO(raw.decode("utf-8")))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError(f"{path} is empty") from None
    if not header or header[0].strip().lower() != "label":
        raise FormatError(f"{path}: CSV header must start with 'label'")
    d = len(header) - 1
    if d < 1:
        raise FormatError(f"{path}: CSV header declares no feature columns")
    labels: list[str] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != d + 1:
            raise DimensionError(
                f"{path}:{lineno}: row has {len(row) - 1} values, header declares {d}"
            )
        labels.append(row[0].strip())
        try:
            rows.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise EmptyInputError(f"{path}: CSV file holds no data rows")
    return _remap(np.asarray(rows, dtype=np.float64), labels)


def _remap(vectors: np.ndarray, raw_labels: list) -> LabeledDataset:
    names = sorted(set(raw_labels))
    index = {name: i for i, name in enumerate(names)}
    dense = np.array([index[lbl] for lbl in raw_labels], dtype=np.int64)
    return LabeledDataset(vectors, dense, label_names=names)


def train_test_split(
    ds: LabeledDataset, test_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split: each class contributes floor(M_k * fraction) test
    items. Deterministic given the seed."""
    if not 0.0 <= test_fraction < 1.0:
        raise ConfigError(f"test_fraction must lie in [0, 1), got {test_fraction}")
    rng = derive_rng(seed)
    test_mask = np.zeros(len(ds.labels), dtype=bool)
    for k in range(ds.K):
        idx = ds.class_indices(k)
        n_test = int(len(idx) * test_fraction)
        if n_test:
            test_mask[rng.choice(idx, size=n_test, replace=False)] = True
    train = LabeledDataset(ds.vectors[~test_mask], ds.labels[~test_mask], ds.label_names)
    test = LabeledDataset(ds.vectors[test_mask], ds.labels[test_mask], ds.label_names)
    return train, test


def results_to_dict(obj) -> dict:
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise ConfigError(f"cannot serialize result of type {type(obj).__name__}")


def render_results(obj, fmt: str = "json") -> str:
    """Serialize a result object with stable field ordering."""
    if fmt == "json":
        return json.dumps(results_to_dict(obj), indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(obj)
    raise FormatError(f"unknown results format {fmt!r}")


def _render_csv(obj) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if isinstance(obj, AccuracyTable):
        writer.writerow(["dataset", "c", "k", "accuracy"])
        for c, k, acc in obj.cells:
            writer.writerow([obj.dataset_id, c, k, _CSV_FLOAT_FMT % acc])
        return out.getvalue()
    if isinstance(obj, ProbEstimate):
        writer.writerow(["successes", "trials", "point_estimate", "ci_low", "ci_high"])
        writer.writerow(
            [obj.successes, obj.trials]
            + [_CSV_FLOAT_FMT % v for v in (obj.point_estimate, obj.ci_low, obj.ci_high)]
        )
        return out.getvalue()
    raise FormatError(f"no CSV layout for {type(obj).__name__}; use JSON")


def save_results(obj, path: str | Path, fmt: str = "json") -> None:
    try:
        Path(path).write_text(render_results(obj, fmt))
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc
