"""Model files, result documents and trace CSVs.

Models and results are JSON; numbers are written with 9 significant digits,
non-finite values as the strings ``"inf"``, ``"-inf"`` and ``"nan"``, and
keys are sorted so that output is byte-for-byte reproducible.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Alphabet, TypeVector
from .elcompare import BUILTIN_GENERATORS, ThetaGenerator, model_at
from .exceptions import ValidationError
from .geometry import ConstraintModel
from .pp import PPTrace
from .validation import check_alphabet, check_constraints

SIG_DIGITS = 9
THETA_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """A parsed model file.

    ``model`` is set for fixed constraints; parametrized files set
    ``generator`` and ``theta_grid`` instead.
    """

    alphabet: Alphabet
    nu: TypeVector
    model: Optional[ConstraintModel] = None
    generator: Optional[ThetaGenerator] = None
    theta_grid: tuple = ()
    source: Optional[str] = None

    @property
    def parametrized(self) -> bool:
        return self.generator is not None

    def at(self, theta: Optional[float] = None) -> ConstraintModel:
        """The constraint model, evaluated at ``theta`` for parametrized files."""
        if not self.parametrized:
            if theta is not None:
                raise ValidationError("--theta given but the model has fixed constraints")
            return self.model
        if theta is None:
            if len(self.theta_grid) != 1:
                raise ValidationError("parametrized model: choose a value with --theta")
            theta = self.theta_grid[0]
        return model_at(self.generator, float(theta), self.alphabet.labels)


def _parse_type(doc: dict, alphabet: Alphabet) -> TypeVector:
    t = doc.get("type")
    if not isinstance(t, dict):
        raise ValidationError("model file needs a 'type' object with 'counts' or 'frequencies'")
    if "counts" in t:
        counts = np.asarray(t["counts"])
        if counts.shape != (alphabet.m,):
            raise ValidationError(f"'counts' must have {alphabet.m} entries")
        if not np.issubdtype(counts.dtype, np.number):
            raise ValidationError("'counts' must be numbers")
        return TypeVector.from_counts(counts)
    if "frequencies" in t:
        freqs = np.asarray(t["frequencies"], dtype=float)
        if freqs.shape != (alphabet.m,):
            raise ValidationError(f"'frequencies' must have {alphabet.m} entries")
        return TypeVector.from_frequencies(freqs, n=t.get("n"))
    raise ValidationError("'type' needs 'counts' or 'frequencies'")


def _table_generator(table, alphabet: Alphabet) -> tuple[ThetaGenerator, tuple]:
    models = []
    for entry in table:
        if not isinstance(entry, dict) or "theta" not in entry or "constraints" not in entry:
            raise ValidationError("theta_table entries need 'theta' and 'constraints'")
        models.append((float(entry["theta"]), check_constraints(entry["constraints"], alphabet)))
    if not models:
        raise ValidationError("theta_table is empty")

    def generator(theta: float) -> ConstraintModel:
        for t, m in models:
            if abs(t - theta) <= THETA_MATCH_TOL * max(1.0, abs(t)):
                return m
        raise ValidationError(f"theta={theta!r} is not in the theta_table")

    return generator, tuple(t for t, _ in models)


def parse_model(doc: dict, source: Optional[str] = None) -> ModelSpec:
    if not isinstance(doc, dict):
        raise ValidationError("model file must hold a JSON object")
    if "alphabet" not in doc:
        raise ValidationError("model file needs an 'alphabet'")
    alphabet = check_alphabet(doc["alphabet"])
    nu = _parse_type(doc, alphabet)
    kinds = [k for k in ("constraints", "theta_table", "builtin") if k in doc]
    if len(kinds) != 1:
        raise ValidationError("model file needs exactly one of 'constraints', 'theta_table', 'builtin'")
    if "constraints" in doc:
        return ModelSpec(alphabet, nu, model=check_constraints(doc["constraints"], alphabet), source=source)
    if "theta_table" in doc:
        gen, grid = _table_generator(doc["theta_table"], alphabet)
        if "theta_grid" in doc:
            grid = tuple(float(t) for t in doc["theta_grid"])
        return ModelSpec(alphabet, nu, generator=gen, theta_grid=grid, source=source)
    name = doc["builtin"]
    if name not in BUILTIN_GENERATORS:
        raise ValidationError(f"unknown builtin {name!r}; choose from {sorted(BUILTIN_GENERATORS)}")
    grid = tuple(float(t) for t in doc.get("theta_grid", ()))
    if not grid:
        raise ValidationError("builtin models need a non-empty 'theta_grid'")
    return ModelSpec(alphabet, nu, generator=BUILTIN_GENERATORS[name](alphabet.values()),
                     theta_grid=grid, source=source)


def load_model(path) -> ModelSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None
    return parse_model(doc, source=str(path))


def _round(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return 0.0
    return float(f"{x:.{SIG_DIGITS}g}")


def to_jsonable(obj):
    """Recursively convert numpy data, enums and floats into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def parse_number(x):
    """Inverse of the non-finite encoding used by :func:`dumps`."""
    if isinstance(x, str):
        return float(x)
    return x


def trace_csv(trace: PPTrace, labels) -> str:
    """Trace as CSV: ``delta,q_<label>...,value,gamma_1..gamma_{r+1}``, LF line endings."""
    labels = [str(lab) for lab in labels]
    if not len(trace):
        raise ValidationError("empty trace")
    k = len(trace[0].gamma)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_NONE)
    try:
        w.writerow(["delta", *(f"q_{lab}" for lab in labels), "value",
                    *(f"gamma_{i}" for i in range(1, k + 1))])
        for row in trace:
            w.writerow([f"{row.delta:.{SIG_DIGITS}g}",
                        *(f"{v:.{SIG_DIGITS}g}" for v in row.q_hat),
                        f"{row.neg_dual_value:.{SIG_DIGITS}g}",
                        *(str(int(g)) for g in row.gamma)])
    except csv.Error:
        raise ValidationError("labels must not contain CSV delimiters or quotes") from None
    return buf.getvalue()


def read_trace_csv(text: str) -> dict:
    """Parse a trace CSV back into columns of floats."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}


def load_schema(name: str) -> dict:
    """One of the shipped JSON schemas: ``"model"`` or ``"result"``."""
    text = resources.files("simplex_mle").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
