"""Lossless persistence of the package's artifacts.

Text formats carry 17 significant digits so that a save/load round trip
reproduces every float bit-exactly.  Each format starts with a tagged
version header; loading anything else raises SchemaMismatch.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .edgestats import EdgeSampleSet
from .errors import IOFailure, SchemaMismatch
from .freeconv import DensityTable
from .initial_data import InitialData
from .streams import NoiseLedger

__all__ = [
    "save_initial_data", "load_initial_data",
    "save_density_table", "load_density_table",
    "save_quantile_table", "load_quantile_table",
    "save_sample_set", "load_sample_set",
    "save_report", "load_report",
    "save_noise_ledger", "load_noise_ledger",
    "atomic_write",
]

_FMT = "%.17g"


def atomic_write(path: str, data: bytes):
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _read_lines(path: str):
    try:
        with open(path, "r") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc


def save_initial_data(V: InitialData, path: str):
    """Two-column text format: header `N C_V`, then one value per line."""
    lines = [f"{V.size} {_FMT % V.norm_exponent}"]
    lines.extend(_FMT % v for v in V.values)
    atomic_write(path, ("\n".join(lines) + "\n").encode())


def load_initial_data(path: str) -> InitialData:
    lines = _read_lines(path)
    try:
        n_str, cv_str = lines[0].split()
        n = int(n_str)
        vals = np.array([float(x) for x in lines[1:1 + n]])
        if vals.size != n:
            raise ValueError("truncated value block")
        return InitialData(values=vals, norm_exponent=float(cv_str))
    except (ValueError, IndexError) as exc:
        raise SchemaMismatch(f"not an initial-data file: {path}: {exc}") from exc


def save_density_table(table: DensityTable, path: str):
    """CSV with columns E, rho (cumulative is rebuilt on load)."""
    lines = ["E,rho"]
    lines.extend(f"{_FMT % e},{_FMT % r}" for e, r in zip(table.nodes, table.rho))
    atomic_write(path, ("\n".join(lines) + "\n").encode())


def load_density_table(path: str) -> DensityTable:
    lines = _read_lines(path)
    if not lines or lines[0] != "E,rho":
        raise SchemaMismatch(f"not a density table: {path}")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    nodes = np.array([float(a) for a, _ in rows])
    rho = np.array([float(b) for _, b in rows])
    return DensityTable(nodes, rho)


def save_quantile_table(indices, gamma, path: str):
    """CSV with columns i, gamma_i."""
    lines = ["i,gamma_i"]
    lines.extend(f"{int(i)},{_FMT % g}" for i, g in zip(indices, gamma))
    atomic_write(path, ("\n".join(lines) + "\n").encode())


def load_quantile_table(path: str):
    lines = _read_lines(path)
    if not lines or lines[0] != "i,gamma_i":
        raise SchemaMismatch(f"not a quantile table: {path}")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    return (np.array([int(a) for a, _ in rows]),
            np.array([float(b) for _, b in rows]))


def save_sample_set(sset: EdgeSampleSet, path: str):
    """CSV `trial, j, value` preceded by a JSON meta header comment."""
    lines = ["# dbmedge-sample-set v1"]
    lines.append("# " + json.dumps(sset.meta, sort_keys=True, default=str))
    lines.append("trial,j,value")
    for m in range(sset.trials):
        for j in range(sset.k + 1):
            lines.append(f"{m},{j},{_FMT % sset.samples[m, j]}")
    atomic_write(path, ("\n".join(lines) + "\n").encode())


def load_sample_set(path: str) -> EdgeSampleSet:
    lines = _read_lines(path)
    if not lines or lines[0] != "# dbmedge-sample-set v1":
        raise SchemaMismatch(f"not a sample-set file: {path}")
    meta = json.loads(lines[1][2:])
    rows = [ln.split(",") for ln in lines[3:] if ln]
    trials = max(int(r[0]) for r in rows) + 1
    k = max(int(r[1]) for r in rows) + 1
    out = np.empty((trials, k))
    for tr, j, val in rows:
        out[int(tr), int(j)] = float(val)
    return EdgeSampleSet(samples=out, meta=meta)


def save_report(report: dict, path: str):
    """Reports serialize as JSON {meta, envelopes, per_trial, verdicts}."""
    payload = {"schema": "dbmedge-report v1"}
    payload.update(report)
    atomic_write(path, (json.dumps(payload, sort_keys=True, indent=1,
                                   default=_jsonable) + "\n").encode())


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def load_report(path: str) -> dict:
    lines = _read_lines(path)
    try:
        payload = json.loads("\n".join(lines))
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"not a report: {path}") from exc
    if payload.get("schema") != "dbmedge-report v1":
        raise SchemaMismatch(f"unexpected report schema in {path}")
    return payload


def save_noise_ledger(ledger: NoiseLedger, path: str):
    """Binary: JSON header line, then the top-level increment block.

    Splits below the top level regenerate deterministically from the
    stream tag, so the top-level block suffices for exact replay.
    """
    header = json.dumps({
        "schema": "dbmedge-ledger v1",
        "stream_tag": str(ledger.stream_tag),
        "t0": ledger.t0, "dt_top": ledger.dt_top, "n_steps": ledger.n_steps,
        "idx_lo": ledger.idx_lo, "idx_hi": ledger.idx_hi,
    }, sort_keys=True).encode() + b"\n"
    block = ledger.materialize_top_level().astype("<f8").tobytes()
    atomic_write(path, header + block)


def load_noise_ledger(path: str) -> NoiseLedger:
    try:
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            block = fh.read()
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"not a ledger file: {path}: {exc}") from exc
    if header.get("schema") != "dbmedge-ledger v1":
        raise SchemaMismatch(f"unexpected ledger schema in {path}")
    ledger = NoiseLedger(header["stream_tag"], header["t0"], header["dt_top"],
                         header["n_steps"], header["idx_lo"], header["idx_hi"])
    data = np.frombuffer(block, dtype="<f8").reshape(header["n_steps"], ledger.width)
    for k in range(header["n_steps"]):
        ledger._cache[(k, 0, 0)] = data[k].copy()
    return ledger
