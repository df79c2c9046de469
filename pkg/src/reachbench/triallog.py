"""Persistent session logs.

Records: line-delimited JSON, UTF-8, one object per line; the first line is a
header carrying schema_version=1 and the session configuration. Trajectory
samples live in a sidecar columnar text file (one row per plant tick:
trial_id t x y vx vy fhx fhy frx fry) written at 17 significant digits so the
round trip is lossless. Readers reject unknown schema versions rather than
guessing.
"""

from __future__ import annotations

import json
import os
from typing import Optional

import numpy as np

from .errors import SchemaVersionMismatch, TrialLogError
from .metrics import TrialRecord
from .trials import TrialOutcome, TrialSpec

SCHEMA_VERSION = 1
SIDECAR_COLUMNS = ("trial_id", "t", "x", "y", "vx", "vy", "fhx", "fhy", "frx", "fry")


def sidecar_path(log_path: str) -> str:
    base = log_path[:-6] if log_path.endswith(".jsonl") else log_path
    return base + ".traj.txt"


def make_trial_record(
    session_id: str, mode: str, spec: TrialSpec, outcome: TrialOutcome, path_ref: str
) -> TrialRecord:
    obstacle = None
    if spec.obstacle is not None:
        a, b = spec.obstacle
        obstacle = (a.x, a.y, b.x, b.y)
    return TrialRecord(
        session_id=session_id,
        trial_id=spec.trial_id,
        mode=mode,
        start=(spec.start.x, spec.start.y),
        target_center=(spec.target_center.x, spec.target_center.y),
        target_distance=spec.target_distance,
        target_width=spec.target_width,
        size_class=spec.size_class,
        obstacle=obstacle,
        id_bits=spec.id_bits,
        success=outcome.success,
        collided=outcome.collided,
        movement_time=outcome.movement_time,
        path_ref=path_ref,
    ).validate()


def _record_to_json(r: TrialRecord) -> dict:
    return {
        "kind": "trial",
        "session_id": r.session_id,
        "trial_id": r.trial_id,
        "mode": r.mode,
        "start": list(r.start),
        "target_center": list(r.target_center),
        "target_distance": r.target_distance,
        "target_width": r.target_width,
        "size_class": r.size_class,
        "obstacle": list(r.obstacle) if r.obstacle is not None else None,
        "id_bits": r.id_bits,
        "success": r.success,
        "collided": r.collided,
        "movement_time": r.movement_time,
        "path_ref": r.path_ref,
    }


def _record_from_json(d: dict) -> TrialRecord:
    return TrialRecord(
        session_id=d["session_id"],
        trial_id=d["trial_id"],
        mode=d["mode"],
        start=tuple(d["start"]),
        target_center=tuple(d["target_center"]),
        target_distance=d["target_distance"],
        target_width=d["target_width"],
        size_class=d["size_class"],
        obstacle=tuple(d["obstacle"]) if d.get("obstacle") is not None else None,
        id_bits=d["id_bits"],
        success=d["success"],
        collided=d["collided"],
        movement_time=d.get("movement_time"),
        path_ref=d["path_ref"],
    ).validate()


def write_trial_log(
    log_path: str,
    records: list[TrialRecord],
    trajectories: dict[int, np.ndarray],
    header_extra: Optional[dict] = None,
) -> None:
    """Write records (JSONL) plus the trajectory sidecar.

    ``trajectories`` maps trial_id to an (n, 9) array of
    (t, x, y, vx, vy, fhx, fhy, frx, fry) rows.
    """
    header = {"kind": "header", "schema_version": SCHEMA_VERSION}
    if header_extra:
        header.update(header_extra)
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for r in records:
            fh.write(json.dumps(_record_to_json(r)) + "\n")
    with open(sidecar_path(log_path), "w", encoding="utf-8") as fh:
        fh.write(" ".join(SIDECAR_COLUMNS) + "\n")
        for r in records:
            rows = trajectories.get(r.trial_id)
            if rows is None:
                continue
            tid = str(r.trial_id)
            for row in rows:
                fh.write(tid + " " + " ".join("%.17g" % v for v in row) + "\n")


def read_trial_log(log_path: str) -> tuple[dict, list[TrialRecord], dict[int, np.ndarray]]:
    """Read a session log; returns (header, records, trajectories).

    Raises SchemaVersionMismatch for unknown versions and TrialLogError for
    truncated or malformed content — never a partial silent success.
    """
    if not os.path.exists(log_path):
        raise TrialLogError(f"no such log: {log_path}")
    with open(log_path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TrialLogError(f"empty log: {log_path}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TrialLogError(f"unreadable log header: {exc}") from exc
    if header.get("kind") != "header" or "schema_version" not in header:
        raise SchemaVersionMismatch("first line is not a schema header")
    if header["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"unknown schema version {header['schema_version']}, expected {SCHEMA_VERSION}"
        )
    records = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TrialLogError(f"truncated or malformed record at line {i}: {exc}") from exc
        if d.get("kind") != "trial":
            raise TrialLogError(f"unexpected record kind {d.get('kind')!r} at line {i}")
        records.append(_record_from_json(d))

    side = sidecar_path(log_path)
    if not os.path.exists(side):
        raise TrialLogError(f"missing trajectory sidecar: {side}")
    with open(side, "r", encoding="utf-8") as fh:
        header_line = fh.readline().split()
        if tuple(header_line) != SIDECAR_COLUMNS:
            raise TrialLogError(f"unexpected sidecar columns: {header_line}")
        by_trial: dict[int, list[list[float]]] = {}
        for i, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != len(SIDECAR_COLUMNS):
                raise TrialLogError(f"short sidecar row at line {i}")
            try:
                tid = int(parts[0])
                row = [float(v) for v in parts[1:]]
            except ValueError as exc:
                raise TrialLogError(f"malformed sidecar row at line {i}: {exc}") from exc
            by_trial.setdefault(tid, []).append(row)
    trajectories = {tid: np.array(rows) for tid, rows in by_trial.items()}
    return header, records, trajectories
