"""Vertex-cloud readers, knee manifests and locale-independent CSV output."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from bigeo.knee import DegenerateFrameError, KneeRecord, frame_from_vertices


class ManifestError(ValueError):
    pass


def fmt(x) -> str:
    """Round-trip exact float text: 17 significant digits, '.' separator."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(stream: TextIO, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def parse_off(text: str, name: str = "<string>") -> np.ndarray:
    """Vertices of an OFF mesh; faces are ignored."""
    lines = list(_content_lines(text))
    if not lines or lines[0].split()[0] != "OFF":
        got = lines[0].split()[0] if lines else "<empty>"
        raise ValueError(f"{name}: malformed OFF header (expected 'OFF', got {got!r})")
    head = lines[0].split()[1:]
    body = lines[1:]
    if not head:
        if not body:
            raise ValueError(f"{name}: OFF file lacks the vertex/face count line")
        head, body = body[0].split(), body[1:]
    try:
        n_vertices = int(head[0])
    except (IndexError, ValueError):
        raise ValueError(f"{name}: bad OFF count line {' '.join(head)!r}") from None
    if len(body) < n_vertices:
        raise ValueError(f"{name}: OFF declares {n_vertices} vertices but only {len(body)} lines follow")
    try:
        return np.array([[float(v) for v in line.split()[:3]] for line in body[:n_vertices]]).reshape(-1, 3)
    except ValueError as err:
        raise ValueError(f"{name}: bad OFF vertex line ({err})") from None


def parse_xyz(text: str, name: str = "<string>") -> np.ndarray:
    rows = []
    for line in _content_lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{name}: expected 'x y z' per line, got {line!r}")
        rows.append([float(p) for p in parts])
    return np.array(rows, dtype=float).reshape(-1, 3)


def read_vertices(path) -> np.ndarray:
    """Read an OFF mesh or a plain 'x y z' per line file (mm)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"vertex file not found: {path}")
    text = path.read_text()
    first = next(_content_lines(text), "")
    if path.suffix.lower() == ".off" or first.startswith("OFF"):
        return parse_off(text, str(path))
    return parse_xyz(text, str(path))


def write_off(path, vertices) -> None:
    V = np.asarray(vertices, dtype=float)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"OFF\n{len(V)} 0 0\n")
        for v in V:
            fh.write(" ".join(format(c, ".6f") for c in v) + "\n")


def write_xyz(path, vertices) -> None:
    with open(path, "w", newline="\n") as fh:
        for v in np.asarray(vertices, dtype=float):
            fh.write(" ".join(format(c, ".6f") for c in v) + "\n")


def load_manifest(path) -> list[KneeRecord]:
    """Records from a JSON array of {subject_id, kl_grade, femur_path, tibia_path}.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    try:
        entries = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ManifestError(f"{path}: invalid JSON ({err})") from None
    if not isinstance(entries, list):
        raise ManifestError(f"{path}: manifest must be a JSON array")
    records = []
    for i, entry in enumerate(entries):
        try:
            sid = str(entry["subject_id"])
            grade = int(entry["kl_grade"])
            femur_path = path.parent / entry["femur_path"]
            tibia_path = path.parent / entry["tibia_path"]
        except (KeyError, TypeError, ValueError) as err:
            raise ManifestError(f"{path}: entry {i} is malformed ({err})") from None
        try:
            femur = frame_from_vertices(read_vertices(femur_path))
            tibia = frame_from_vertices(read_vertices(tibia_path))
        except DegenerateFrameError as err:
            raise DegenerateFrameError(f"subject {sid}: {err}") from None
        records.append(KneeRecord(sid, grade, femur, tibia))
    return records


def write_knee_fixture(directory, clouds) -> Path:
    """Write (subject_id, grade, femur, tibia) clouds plus a manifest.

    Femurs are stored as OFF meshes without faces, tibiae as xyz text, so
    both input formats are exercised.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    for sid, grade, femur, tibia in clouds:
        write_off(directory / f"{sid}_femur.off", femur)
        write_xyz(directory / f"{sid}_tibia.xyz", tibia)
        manifest.append(
            {"subject_id": sid, "kl_grade": int(grade), "femur_path": f"{sid}_femur.off", "tibia_path": f"{sid}_tibia.xyz"}
        )
    out = directory / "manifest.json"
    out.write_text(json.dumps(manifest, indent=1) + "\n")
    return out
