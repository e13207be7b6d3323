"""File formats: structures, plans, magnet layouts, trajectories, OBJ.

JSON documents carry a format_version field and are emitted with sorted
keys and two-space indentation so that identical inputs serialize to
identical bytes. Parse failures raise ParseError pointing at the
offending field or line rather than crashing with a bare traceback.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import DesignMeta, Trajectory
from .docking import CellLayout, FaceLayout, MagnetSpec, Polarity
from .errors import ParseError, ValidationError
from .geometry import ContactType, Mesh
from .kinematics import PivotMove
from .lattice import Cell, CellKind, Configuration, check_pos

FORMAT_VERSION = 1

_KINDS = {k.value: k for k in CellKind}
_CONTACTS = {c.value: c for c in ContactType}
_POLARITIES = {p.value: p for p in Polarity}


@dataclass(frozen=True)
class StructureDoc:
    """A structure file's payload: the cells plus an optional physical
    scale (centimeters per canonical unit)."""

    config: Configuration
    scale_cm_per_unit: float | None = None


def _load_json(text: str, source: str | None) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON: {exc.msg}", source, f"line {exc.lineno} column {exc.colno}"
        ) from exc


def _field(obj: dict, key: str, types, where: str, source, required=True, default=None):
    if key not in obj:
        if required:
            raise ParseError(f"missing field {key!r}", source, where)
        return default
    val = obj[key]
    if types is not None and not isinstance(val, types):
        raise ParseError(f"field {key!r} has wrong type", source, where)
    return val


def _check_version(obj: dict, source) -> None:
    v = obj.get("format_version", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {v!r}", source)


def _parse_pos(raw, where: str, source) -> tuple[int, int, int]:
    if (
        not isinstance(raw, list)
        or len(raw) != 3
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw)
    ):
        raise ParseError("position must be three integers", source, where)
    try:
        return check_pos(raw)
    except ValidationError as exc:
        raise ParseError(str(exc), source, where) from exc


# --------------------------------------------------------------------------
# structures
# --------------------------------------------------------------------------


def parse_structure(data: object, source: str | None = None) -> StructureDoc:
    if not isinstance(data, dict):
        raise ParseError("structure document must be a JSON object", source)
    _check_version(data, source)
    scale = _field(data, "scale_cm_per_unit", (int, float), "", source, required=False)
    if scale is not None:
        scale = float(scale)
        if scale <= 0:
            raise ParseError("scale_cm_per_unit must be positive", source)
    raw_cells = _field(data, "cells", list, "", source)
    cells = []
    seen: dict[tuple[int, int, int], int] = {}
    for i, rc in enumerate(raw_cells):
        where = f"cells[{i}]"
        if not isinstance(rc, dict):
            raise ParseError("cell must be an object", source, where)
        pos = _parse_pos(_field(rc, "pos", list, where, source), f"{where}.pos", source)
        if pos in seen:
            raise ParseError(
                f"duplicate position {list(pos)} (first at cells[{seen[pos]}])",
                source,
                f"{where}.pos",
            )
        seen[pos] = i
        kind_raw = _field(rc, "kind", str, where, source)
        if kind_raw not in _KINDS:
            raise ParseError(
                f"kind must be one of {sorted(_KINDS)}", source, f"{where}.kind"
            )
        orient = _field(rc, "orient", int, where, source, required=False, default=0)
        if not 0 <= orient <= 23:
            raise ParseError("orient must be in 0..23", source, f"{where}.orient")
        cells.append(Cell(pos, _KINDS[kind_raw], orient))
    if not cells:
        raise ParseError("structure has no cells", source)
    return StructureDoc(Configuration(cells), scale)


def structure_to_dict(doc: StructureDoc) -> dict:
    out: dict = {
        "format_version": FORMAT_VERSION,
        "cells": [
            {"pos": list(c.pos), "kind": c.kind.value, "orient": c.orient}
            for c in doc.config.cells
        ],
    }
    if doc.scale_cm_per_unit is not None:
        out["scale_cm_per_unit"] = doc.scale_cm_per_unit
    return out


def dumps_structure(doc: StructureDoc) -> str:
    return json.dumps(structure_to_dict(doc), indent=2, sort_keys=True) + "\n"


def load_structure(path: str | Path) -> StructureDoc:
    p = Path(path)
    return parse_structure(_load_json(p.read_text(encoding="utf-8"), str(p)), str(p))


def save_structure(doc: StructureDoc, path: str | Path) -> None:
    Path(path).write_text(dumps_structure(doc), encoding="utf-8")


# --------------------------------------------------------------------------
# plans
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanDoc:
    start: StructureDoc
    moves: tuple[PivotMove, ...]


def parse_plan(data: object, source: str | None = None) -> PlanDoc:
    from .lattice import FACE_DIRS

    if not isinstance(data, dict):
        raise ParseError("plan document must be a JSON object", source)
    _check_version(data, source)
    start = parse_structure(_field(data, "start", dict, "", source), source)
    raw_moves = _field(data, "moves", list, "", source)
    moves = []
    for i, rm in enumerate(raw_moves):
        where = f"moves[{i}]"
        if not isinstance(rm, dict):
            raise ParseError("move must be an object", source, where)
        mover = _parse_pos(
            _field(rm, "mover", list, where, source), f"{where}.mover", source
        )
        substrate = _parse_pos(
            _field(rm, "substrate", list, where, source), f"{where}.substrate", source
        )
        fi = _field(rm, "from", int, where, source)
        ti = _field(rm, "to", int, where, source)
        for name, v in (("from", fi), ("to", ti)):
            if not 0 <= v <= 11:
                raise ParseError(
                    f"{name} must be a face index in 0..11", source, f"{where}.{name}"
                )
        try:
            moves.append(PivotMove(mover, substrate, FACE_DIRS[fi], FACE_DIRS[ti]))
        except ValidationError as exc:
            raise ParseError(str(exc), source, where) from exc
    return PlanDoc(start, tuple(moves))


def plan_to_dict(doc: PlanDoc) -> dict:
    from .lattice import FACE_DIR_INDEX

    return {
        "format_version": FORMAT_VERSION,
        "start": structure_to_dict(doc.start),
        "moves": [
            {
                "mover": list(m.mover),
                "substrate": list(m.substrate),
                "from": FACE_DIR_INDEX[m.from_dir],
                "to": FACE_DIR_INDEX[m.to_dir],
            }
            for m in doc.moves
        ],
    }


def dumps_plan(doc: PlanDoc) -> str:
    return json.dumps(plan_to_dict(doc), indent=2, sort_keys=True) + "\n"


def load_plan(path: str | Path) -> PlanDoc:
    p = Path(path)
    return parse_plan(_load_json(p.read_text(encoding="utf-8"), str(p)), str(p))


def save_plan(doc: PlanDoc, path: str | Path) -> None:
    Path(path).write_text(dumps_plan(doc), encoding="utf-8")


# --------------------------------------------------------------------------
# magnet layouts
# --------------------------------------------------------------------------


def parse_layout(data: object, source: str | None = None) -> CellLayout:
    if not isinstance(data, dict):
        raise ParseError("layout document must be a JSON object", source)
    _check_version(data, source)
    raw_faces = _field(data, "faces", list, "", source)
    if len(raw_faces) != 12:
        raise ParseError(f"layout needs 12 faces, got {len(raw_faces)}", source)
    faces = []
    for i, rf in enumerate(raw_faces):
        where = f"faces[{i}]"
        if not isinstance(rf, dict):
            raise ParseError("face must be an object", source, where)
        d = _field(rf, "dir", int, where, source)
        if d != i:
            raise ParseError(
                f"faces must be listed in direction order; expected dir {i}",
                source,
                f"{where}.dir",
            )
        symmetry = _field(rf, "symmetry", int, where, source, required=False, default=2)
        magnets = []
        for j, rmag in enumerate(_field(rf, "magnets", list, where, source)):
            mwhere = f"{where}.magnets[{j}]"
            if not isinstance(rmag, dict):
                raise ParseError("magnet must be an object", source, mwhere)
            pos = _field(rmag, "pos", list, mwhere, source)
            if len(pos) != 2 or not all(isinstance(v, (int, float)) for v in pos):
                raise ParseError("pos must be two numbers", source, f"{mwhere}.pos")
            pol = _field(rmag, "polarity", str, mwhere, source)
            if pol not in _POLARITIES:
                raise ParseError(
                    "polarity must be 'N' or 'S'", source, f"{mwhere}.polarity"
                )
            magnets.append(MagnetSpec((float(pos[0]), float(pos[1])), _POLARITIES[pol]))
        try:
            faces.append(FaceLayout(tuple(magnets), symmetry))
        except ValidationError as exc:
            raise ParseError(str(exc), source, where) from exc
    try:
        return CellLayout(tuple(faces))
    except ValidationError as exc:
        raise ParseError(str(exc), source) from exc


def layout_to_dict(layout: CellLayout) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "faces": [
            {
                "dir": i,
                "symmetry": f.symmetry,
                "magnets": [
                    {"pos": list(m.pos), "polarity": m.polarity.value}
                    for m in f.magnets
                ],
            }
            for i, f in enumerate(layout.faces)
        ],
    }


def dumps_layout(layout: CellLayout) -> str:
    return json.dumps(layout_to_dict(layout), indent=2, sort_keys=True) + "\n"


def load_layout(path: str | Path) -> CellLayout:
    p = Path(path)
    return parse_layout(_load_json(p.read_text(encoding="utf-8"), str(p)), str(p))


def save_layout(layout: CellLayout, path: str | Path) -> None:
    Path(path).write_text(dumps_layout(layout), encoding="utf-8")


def parse_positions(data: object, source: str | None = None) -> list[tuple[float, float]]:
    """2D magnet positions for the layout search: {"positions": [[u, v], ...]}."""
    if not isinstance(data, dict):
        raise ParseError("positions document must be a JSON object", source)
    raw = _field(data, "positions", list, "", source)
    out = []
    for i, rp in enumerate(raw):
        if (
            not isinstance(rp, list)
            or len(rp) != 2
            or not all(isinstance(v, (int, float)) for v in rp)
        ):
            raise ParseError(
                "position must be two numbers", source, f"positions[{i}]"
            )
        out.append((float(rp[0]), float(rp[1])))
    return out


def load_positions(path: str | Path) -> list[tuple[float, float]]:
    p = Path(path)
    return parse_positions(_load_json(p.read_text(encoding="utf-8"), str(p)), str(p))


# --------------------------------------------------------------------------
# trajectories (CSV)
# --------------------------------------------------------------------------


def parse_trajectories(text: str, source: str | None = None) -> list[Trajectory]:
    """Parse `trial_id,t,x,y[,heading]` CSV into per-trial trajectories.

    Trials appear in order of first occurrence; timestamps must increase
    strictly within each trial.
    """
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty trajectory file", source) from None
    header = [h.strip() for h in header]
    if header not in (["trial_id", "t", "x", "y"], ["trial_id", "t", "x", "y", "heading"]):
        raise ParseError(
            "header must be trial_id,t,x,y[,heading]", source, "line 1"
        )
    has_heading = len(header) == 5

    order: list[str] = []
    rows: dict[str, list[tuple[float, float, float, float | None]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} columns, got {len(row)}",
                source,
                f"line {lineno}",
            )
        trial = row[0].strip()
        if not trial:
            raise ParseError("empty trial_id", source, f"line {lineno}")
        try:
            t = float(row[1])
            x = float(row[2])
            y = float(row[3])
            h = float(row[4]) if has_heading else None
        except ValueError as exc:
            raise ParseError(
                f"bad numeric value: {exc}", source, f"line {lineno}"
            ) from exc
        if trial not in rows:
            rows[trial] = []
            order.append(trial)
        rows[trial].append((t, x, y, h))

    if not order:
        raise ParseError("no data rows", source)
    out = []
    for trial in order:
        data = rows[trial]
        t = np.array([r[0] for r in data])
        xy = np.array([[r[1], r[2]] for r in data])
        heading = np.array([r[3] for r in data]) if has_heading else None
        try:
            out.append(Trajectory(trial, t, xy, heading))
        except ValidationError as exc:
            raise ParseError(str(exc), source) from exc
    return out


def load_trajectories(path: str | Path) -> list[Trajectory]:
    p = Path(path)
    return parse_trajectories(p.read_text(encoding="utf-8"), str(p))


# --------------------------------------------------------------------------
# design metadata
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignSpec:
    meta: DesignMeta
    trial_ids: tuple[str, ...] | None  # None: all trials in the file


def parse_designs(data: object, source: str | None = None) -> list[DesignSpec]:
    if isinstance(data, dict) and "designs" in data:
        raw_list = _field(data, "designs", list, "", source)
    elif isinstance(data, dict):
        raw_list = [data]
    else:
        raise ParseError("design document must be a JSON object", source)
    out = []
    for i, rd in enumerate(raw_list):
        where = f"designs[{i}]"
        if not isinstance(rd, dict):
            raise ParseError("design must be an object", source, where)
        contact_raw = _field(rd, "contact", str, where, source).lower()
        if contact_raw not in _CONTACTS:
            raise ParseError(
                f"contact must be one of {sorted(_CONTACTS)}", source, f"{where}.contact"
            )
        passive = _field(rd, "passive", int, where, source)
        active = _field(rd, "active", int, where, source)
        if passive < 0 or active < 1:
            raise ParseError(
                "need passive >= 0 and active >= 1", source, where
            )
        meta = DesignMeta(
            name=_field(rd, "name", str, where, source),
            passive=passive,
            active=active,
            body_length_cm=float(
                _field(rd, "body_length_cm", (int, float), where, source)
            ),
            body_weight_g=float(
                _field(rd, "body_weight_g", (int, float), where, source)
            ),
            contact=_CONTACTS[contact_raw],
        )
        trials = _field(rd, "trials", list, where, source, required=False)
        if trials is not None:
            if not all(isinstance(t, str) for t in trials):
                raise ParseError("trials must be strings", source, f"{where}.trials")
            trials = tuple(trials)
        out.append(DesignSpec(meta, trials))
    if not out:
        raise ParseError("no designs given", source)
    return out


def load_designs(path: str | Path) -> list[DesignSpec]:
    p = Path(path)
    return parse_designs(_load_json(p.read_text(encoding="utf-8"), str(p)), str(p))


# --------------------------------------------------------------------------
# OBJ export
# --------------------------------------------------------------------------


def export_obj(m: Mesh, scale: float = 1.0) -> str:
    """Wavefront OBJ text: fixed 6-decimal vertices, 1-based CCW faces."""
    if len(m.vertices) == 0 or len(m.faces) == 0:
        raise ValidationError("mesh is empty")
    if scale <= 0:
        raise ValidationError("scale must be positive")
    lines = []
    for v in m.vertices:
        lines.append(f"v {v[0] * scale:.6f} {v[1] * scale:.6f} {v[2] * scale:.6f}")
    for face in m.faces:
        lines.append("f " + " ".join(str(i + 1) for i in face))
    return "\n".join(lines) + "\n"
