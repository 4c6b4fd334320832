"""
On-disk formats.

- matrix / time-series CSV: one row per line, values in %.17g (exact doubles)
- manifest.json: dataset metadata and per-subject file paths
- truth.json, model.json, whiten_report.json
- CSV tables through pandas

JSON is written with sorted keys and a fixed indent; every file is written to
a temporary sibling and moved into place with os.replace.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.model.errors import FormatError
from src.model.types import Dataset, FitResult, ModelState
from src.preprocess.preprocess import WhitenReport, empirical_correlation, regularized_correlation

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MATRIX_FORMAT = "%.17g"

PathLike = Union[str, Path]


# ── Schemas ────────────────────────────────────────────────────────

class SubjectEntry(BaseModel):
    id: str
    path: str  # relative to the manifest's directory


class Manifest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    n: int
    p: int
    t_ori: int
    kind: Literal["covariance", "correlation"] = "correlation"
    payload: Literal["matrix", "timeseries"] = "matrix"
    node_names: Optional[List[str]] = None
    subjects: List[SubjectEntry]
    provenance: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_counts(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")
        if len(self.subjects) != self.n:
            raise ValueError(f"manifest lists {len(self.subjects)} subjects but n={self.n}")
        if self.node_names is not None and len(self.node_names) != self.p:
            raise ValueError(f"{len(self.node_names)} node names for p={self.p}")
        return self


class TruthFile(BaseModel):
    schema_version: int = SCHEMA_VERSION
    view_labels: List[int]
    cluster_labels: List[List[int]]


class ModelFile(BaseModel):
    schema_version: int = SCHEMA_VERSION
    u: List[int]
    y: List[List[int]]
    z: List[List[int]]
    T: int
    log_posterior: float
    seed: int
    iterations: int
    converged: bool
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    hyperparams: Dict[str, Any] = Field(default_factory=dict)
    selection: Dict[str, Any] = Field(default_factory=dict)

    def to_state(self) -> ModelState:
        state = ModelState(u=self.u, y=self.y, z=self.z, T=self.T)
        state.validate()
        return state


class WhitenReportFile(BaseModel):
    schema_version: int = SCHEMA_VERSION
    p: int
    mean_matrix: str
    mean_inv_sqrt: str
    mean_sqrt: str
    provenance: Dict[str, Any] = Field(default_factory=dict)


# ── Primitive writers ──────────────────────────────────────────────

def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write text to a temporary file next to path, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})")


def format_matrix(matrix: np.ndarray) -> str:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return "\n".join(",".join(MATRIX_FORMAT % x for x in row) for row in matrix) + "\n"


def write_matrix_csv(path: PathLike, matrix: np.ndarray) -> Path:
    return atomic_write_text(path, format_matrix(matrix))


def read_matrix_csv(path: PathLike) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as e:
        raise FormatError(f"{path}: not a numeric CSV matrix ({e})")


def write_table(path: PathLike, rows: Union[pd.DataFrame, Sequence[Dict[str, Any]]]) -> Path:
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
    return atomic_write_text(path, frame.to_csv(index=False, float_format="%.10g", lineterminator="\n"))


def _parse(model, payload: Dict[str, Any], path: PathLike):
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        raise FormatError(f"{path}: {e}")


# ── Datasets ───────────────────────────────────────────────────────

def write_dataset(out_dir: PathLike, data: Dataset,
                  provenance: Optional[Dict[str, Any]] = None) -> Path:
    """Write subjects/<id>.csv per matrix and manifest.json; returns the manifest path."""
    out_dir = Path(out_dir)
    subjects = []
    for sid, matrix in zip(data.subject_ids, data.matrices):
        rel = f"subjects/{sid}.csv"
        write_matrix_csv(out_dir / rel, matrix)
        subjects.append(SubjectEntry(id=sid, path=rel))
    manifest = Manifest(
        n=data.n, p=data.p, t_ori=data.t_ori, kind=data.kind,
        node_names=None if data.node_names is None else list(data.node_names),
        subjects=subjects, provenance=provenance or {},
    )
    return write_json(out_dir / "manifest.json", manifest.model_dump())


def read_manifest(path: PathLike) -> Manifest:
    return _parse(Manifest, read_json(path), path)


def read_dataset(manifest_path: PathLike, regularize: bool = False) -> Tuple[Dataset, Manifest]:
    """
    Load a dataset from its manifest.

    Time-series payloads (T x p per subject) become correlation matrices, with
    Ledoit-Wolf shrinkage first when regularize is set.
    """
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    if regularize and manifest.payload != "timeseries":
        raise FormatError("Ledoit-Wolf regularisation needs time-series input, "
                          f"but {manifest_path} holds matrices")
    base = manifest_path.parent
    matrices = []
    for subject in manifest.subjects:
        values = read_matrix_csv(base / subject.path)
        if manifest.payload == "timeseries":
            if values.shape[1] != manifest.p:
                raise FormatError(f"subject '{subject.id}': series has {values.shape[1]} columns, p={manifest.p}")
            values = regularized_correlation(values) if regularize else empirical_correlation(values)
        elif values.shape != (manifest.p, manifest.p):
            raise FormatError(f"subject '{subject.id}': matrix is {values.shape}, p={manifest.p}")
        matrices.append(values)
    kind = "correlation" if manifest.payload == "timeseries" else manifest.kind
    data = Dataset(
        matrices=np.stack(matrices),
        t_ori=manifest.t_ori,
        kind=kind,
        node_names=None if manifest.node_names is None else tuple(manifest.node_names),
        subject_ids=tuple(s.id for s in manifest.subjects),
    )
    return data, manifest


# ── Ground truth ───────────────────────────────────────────────────

def write_truth(path: PathLike, view_labels: Sequence[int],
                cluster_labels: Sequence[Sequence[int]]) -> Path:
    payload = TruthFile(
        view_labels=[int(x) for x in view_labels],
        cluster_labels=[[int(x) for x in c] for c in cluster_labels],
    )
    return write_json(path, payload.model_dump())


def read_truth(path: PathLike) -> TruthFile:
    return _parse(TruthFile, read_json(path), path)


# ── Models ─────────────────────────────────────────────────────────

def model_file(result: FitResult, hyperparams: Optional[Dict[str, Any]] = None,
               selection: Optional[Dict[str, Any]] = None) -> ModelFile:
    state = result.state
    return ModelFile(
        u=list(state.u),
        y=[list(yv) for yv in state.y],
        z=[list(zv) for zv in state.z],
        T=state.T,
        log_posterior=result.log_posterior,
        seed=result.seed,
        iterations=result.iterations,
        converged=result.converged,
        diagnostics=result.diagnostics.to_dict() if result.diagnostics is not None else {},
        hyperparams=hyperparams or {},
        selection=selection or {},
    )


def write_model(path: PathLike, result: FitResult, hyperparams: Optional[Dict[str, Any]] = None,
                selection: Optional[Dict[str, Any]] = None) -> Path:
    return write_json(path, model_file(result, hyperparams, selection).model_dump())


def read_model(path: PathLike) -> ModelFile:
    return _parse(ModelFile, read_json(path), path)


# ── Whitening reports ──────────────────────────────────────────────

def write_whiten_report(out_dir: PathLike, report: WhitenReport,
                        provenance: Optional[Dict[str, Any]] = None) -> Path:
    """Three matrix CSVs plus whiten_report.json pointing at them."""
    out_dir = Path(out_dir)
    names = {}
    for field_name in ("mean_matrix", "mean_inv_sqrt", "mean_sqrt"):
        names[field_name] = f"{field_name}.csv"
        write_matrix_csv(out_dir / names[field_name], getattr(report, field_name))
    payload = WhitenReportFile(p=report.p, provenance=provenance or {}, **names)
    return write_json(out_dir / "whiten_report.json", payload.model_dump())


def read_whiten_report(path: PathLike) -> WhitenReport:
    path = Path(path)
    meta = _parse(WhitenReportFile, read_json(path), path)
    matrices = {
        name: read_matrix_csv(path.parent / getattr(meta, name))
        for name in ("mean_matrix", "mean_inv_sqrt", "mean_sqrt")
    }
    for name, matrix in matrices.items():
        if matrix.shape != (meta.p, meta.p):
            raise FormatError(f"{name} is {matrix.shape}, report declares p={meta.p}")
    return WhitenReport(**matrices)
