"""CSV ingestion and deterministic artifact writers.

Ingestion splits rows by a group column, drops protected attributes,
one-hot encodes text columns and standardises every feature within each
group. Writers emit JSON with sorted keys and 17-significant-digit floats so
that identical runs give byte-identical files.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import GroupedDataset
from .errors import IngestError, InputError

SCHEMA_VERSION = 1
VARIANCE_FLOOR = 1e-12
RANK_REL = 1e-9


@dataclass(frozen=True)
class IngestConfig:
    group_column: str
    drop_columns: tuple = ()
    standardize: bool = True
    center: bool = True
    one_hot_max_cardinality: int = 64

    def __post_init__(self):
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))
        if self.group_column in self.drop_columns:
            raise InputError(f"group column {self.group_column!r} is also listed to drop")
        if self.one_hot_max_cardinality < 2:
            raise InputError("one_hot_max_cardinality must be at least 2")


@dataclass
class RunManifest:
    input_path: str
    ingest_config: dict
    group_labels: list
    group_sizes: list
    n_rows: int
    n_features: int
    feature_names: list
    rank_estimates: list
    variance_convention: str = "population"
    solver_config: dict = None
    seed: int = None
    # wall-clock seconds per stage; written to timings.json, not manifest.json
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.group_sizes) != self.n_rows:
            raise InputError("group sizes do not add up to the ingested row count")

    def to_dict(self):
        d = asdict(self)
        d.pop("timings")
        d["schema_version"] = SCHEMA_VERSION
        return d


def _parse_float(cell):
    try:
        x = float(cell)
    except ValueError:
        return None
    return x if math.isfinite(x) else None


def _read_rows(csv_path):
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise IngestError(f"input file not found: {csv_path}") from None
    except (UnicodeDecodeError, csv.Error) as exc:
        raise IngestError(f"cannot read CSV {csv_path}: {exc}") from None
    if not rows or not any(c.strip() for c in rows[0]):
        raise IngestError("missing header row")
    header = [c.strip() for c in rows[0]]
    if len(set(header)) != len(header):
        raise IngestError("duplicate column names in header")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    for i, r in enumerate(body, 1):
        if len(r) != len(header):
            raise IngestError(f"expected {len(header)} fields, found {len(r)}", row=i)
    return header, body


def _encode_column(name, cells, max_card):
    """Numeric column as one array, or one-hot indicators for text.

    A column is numeric when every non-empty cell parses as a finite float
    and text when none does; anything in between is an error.
    """
    parsed = [_parse_float(c) for c in cells]
    ok = [p is not None for p in parsed]
    nonempty = [c != "" for c in cells]
    if any(ok):
        for i, (good, filled) in enumerate(zip(ok, nonempty), 1):
            if not good:
                what = "missing numeric value" if not filled else f"unparseable numeric cell {cells[i - 1]!r}"
                raise IngestError(what, row=i, column=name)
        return [name], [np.array(parsed, dtype=np.float64)]
    cats = list(dict.fromkeys(cells))
    if len(cats) > max_card:
        raise IngestError(f"{len(cats)} categories exceed the limit of {max_card}", column=name)
    names = [f"{name}={c}" for c in cats]
    cols = [np.array([c == cat for c in cells], dtype=np.float64) for cat in cats]
    return names, cols


def _standardize(X, center, scale):
    if center:
        X = X - X.mean(axis=0)
    if scale:
        var = X.var(axis=0) if center else (X - X.mean(axis=0)).var(axis=0)
        X = X / np.where(var < VARIANCE_FLOOR, 1.0, np.sqrt(var))
    return X


def rank_estimate(S):
    w = np.linalg.eigvalsh(S)
    top = w[-1]
    if top <= 0:
        return 0
    return int(np.count_nonzero(w > RANK_REL * top))


def ingest(csv_path, config):
    """Read a CSV into a :class:`GroupedDataset` and a :class:`RunManifest`."""
    header, body = _read_rows(csv_path)
    if config.group_column not in header:
        raise IngestError("group column not found in header", column=config.group_column)
    for c in config.drop_columns:
        if c not in header:
            raise IngestError("column to drop not found in header", column=c)
    if not body:
        raise IngestError("no data rows")
    gidx = header.index(config.group_column)
    groups = []
    for i, r in enumerate(body, 1):
        g = r[gidx].strip()
        if not g:
            raise IngestError("empty group value", row=i, column=config.group_column)
        groups.append(g)
    labels = list(dict.fromkeys(groups))

    skip = set(config.drop_columns) | {config.group_column}
    names, cols = [], []
    for j, name in enumerate(header):
        if name in skip:
            continue
        cells = [r[j].strip() for r in body]
        nm, cl = _encode_column(name, cells, config.one_hot_max_cardinality)
        names += nm
        cols += cl
    if not cols:
        raise IngestError("no feature columns left after dropping")
    X = np.column_stack(cols)
    glab = np.array(groups)
    mats = []
    for lab in labels:
        block = X[glab == lab]
        mats.append(_standardize(block, config.center, config.standardize))
    dataset = GroupedDataset(labels, mats, names)
    ranks = [rank_estimate(A.T @ A) for A in mats]
    manifest = RunManifest(
        input_path=str(csv_path), ingest_config=asdict(config), group_labels=labels,
        group_sizes=[int(m.shape[0]) for m in mats], n_rows=len(body),
        n_features=len(names), feature_names=names, rank_estimates=ranks)
    return dataset, manifest


# -- writers ---------------------------------------------------------------

def _fmt_float(x):
    if not math.isfinite(x):
        raise InputError(f"cannot serialise non-finite value {x!r}")
    return format(x, ".17g")


def _to_json(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json_string(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",\n".join(f"{pad}{json_string(k)}: {_to_json(v, indent, level + 1)}"
                          for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        body = ",\n".join(pad + _to_json(v, indent, level + 1) for v in obj)
        return "[\n" + body + "\n" + end + "]"
    raise InputError(f"cannot serialise {type(obj).__name__}")


def json_string(s):
    return json.dumps(s, ensure_ascii=False)


def dumps(obj, indent=2):
    """JSON text with sorted keys and floats at 17 significant digits."""
    return _to_json(obj, indent, 0) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def _csv_cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return _fmt_float(float(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(x) for x in r])


def read_components_csv(path):
    """Inverse of the CSV components writer: ``(feature_names, matrix)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][1:]
    M = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return names, M
