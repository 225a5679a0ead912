"""Map parsers and emitters: Moving AI ``.map``, ASCII scenes, PGM, JSON reports.

All coordinates written or read here are ``(row, col)``, row 0 at the top.

Moving AI files are reduced to a binary world: ``.`` and ``G`` are free,
``@ O T S W`` (out of bounds, trees, swamp, water) are obstacles.

ASCII scenes use ``.`` free, ``#`` obstacle, ``S`` source, ``T`` target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .grid import Coord, GridError, GridMap, SourceSet, make_sources
from .propagate import ActivityMap

MOVINGAI_FREE = frozenset(".G")
MOVINGAI_BLOCKED = frozenset("@OTSW")
REPORT_SCHEMA_VERSION = 1


class MapFormatError(ValueError):
    """Malformed map or scene text; ``line``/``column`` are 1-based."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Scene:
    grid: GridMap
    sources: SourceSet
    targets: tuple[Coord, ...] = ()


def _decode(text: bytes | str) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("ascii")
        except UnicodeDecodeError as e:
            raise MapFormatError(f"non-ASCII byte at offset {e.start}") from None
    return text


def _lines(text: str) -> list[str]:
    lines = text.replace("\r\n", "\n").split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    return lines


def _header_int(line: str, key: str, lineno: int) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise MapFormatError(f"expected '{key} <int>', got {line!r}", lineno)
    try:
        value = int(parts[1])
    except ValueError:
        raise MapFormatError(f"{key} is not an integer: {parts[1]!r}", lineno) from None
    if value < 1:
        raise MapFormatError(f"{key} must be >= 1, got {value}", lineno)
    return value


def parse_movingai(text: bytes | str) -> GridMap:
    lines = _lines(_decode(text))
    if len(lines) < 4:
        raise MapFormatError("truncated header (need type, height, width, map)", len(lines) + 1)
    if lines[0].split() != ["type", "octile"]:
        raise MapFormatError(f"expected 'type octile', got {lines[0]!r}", 1)
    height = _header_int(lines[1], "height", 2)
    width = _header_int(lines[2], "width", 3)
    if lines[3].strip() != "map":
        raise MapFormatError(f"expected 'map', got {lines[3]!r}", 4)
    body = lines[4:]
    if len(body) != height:
        raise MapFormatError(f"header says height {height} but body has {len(body)} rows", 5 + min(len(body), height))
    occ = np.zeros((height, width), dtype=bool)
    for i, row in enumerate(body):
        lineno = 5 + i
        if len(row) != width:
            raise MapFormatError(f"row has {len(row)} cells, header says width {width}", lineno)
        for j, ch in enumerate(row):
            if ch in MOVINGAI_BLOCKED:
                occ[i, j] = True
            elif ch not in MOVINGAI_FREE:
                raise MapFormatError(f"unknown map character {ch!r}", lineno, j + 1)
    try:
        return GridMap(occ)
    except GridError as e:
        raise MapFormatError(str(e), 2) from None


def format_movingai(grid: GridMap) -> bytes:
    rows = ["".join("@" if o else "." for o in row) for row in grid.occupancy]
    head = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    return ("\n".join(head + rows) + "\n").encode("ascii")


def parse_ascii_scene(text: bytes | str) -> Scene:
    lines = _lines(_decode(text))
    if not lines:
        raise MapFormatError("empty scene", 1)
    width = len(lines[0])
    if width == 0:
        raise MapFormatError("empty first row", 1)
    occ = np.zeros((len(lines), width), dtype=bool)
    srcs: list[Coord] = []
    tgts: list[Coord] = []
    for i, row in enumerate(lines):
        if len(row) != width:
            raise MapFormatError(f"ragged row: {len(row)} cells, expected {width}", i + 1)
        for j, ch in enumerate(row):
            if ch == "#":
                occ[i, j] = True
            elif ch == "S":
                srcs.append(Coord(i, j))
            elif ch == "T":
                tgts.append(Coord(i, j))
            elif ch != ".":
                raise MapFormatError(f"unknown scene character {ch!r}", i + 1, j + 1)
    if not srcs:
        raise MapFormatError("scene has no source 'S'")
    grid = GridMap(occ)
    return Scene(grid, make_sources(grid, srcs), tuple(tgts))


def format_ascii_scene(scene: Scene) -> bytes:
    chars = np.where(scene.grid.occupancy, "#", ".").astype("<U1")
    for r, c in scene.targets:
        chars[r, c] = "T"
    for r, c in scene.sources:
        chars[r, c] = "S"
    return ("\n".join("".join(row) for row in chars) + "\n").encode("ascii")


def load_input(path: str) -> tuple[GridMap, list[Coord], list[Coord]]:
    """Read a ``.map`` or ASCII scene file into (grid, sources, targets)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if path.endswith(".map") or data.startswith(b"type "):
        return parse_movingai(data), [], []
    scene = parse_ascii_scene(data)
    return scene.grid, list(scene.sources), list(scene.targets)


def export_pgm(activity: ActivityMap | np.ndarray) -> bytes:
    """Binary PGM (P5) with activity rescaled so the map maximum is white."""
    vals = activity.values if isinstance(activity, ActivityMap) else np.asarray(activity)
    vals = vals.astype(np.int64)
    h, w = vals.shape
    vmax = int(vals.max()) if vals.size else 0
    maxval = 65535 if vmax > 255 else 255
    if vmax > 0:
        pix = (vals * maxval + vmax // 2) // vmax
    else:
        pix = np.zeros_like(vals)
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    data = pix.astype(">u2" if maxval > 255 else "u1").tobytes()
    return header + data


def read_pgm(data: bytes) -> tuple[int, np.ndarray]:
    """Parse a P5 file written by :func:`export_pgm`; returns (maxval, pixels)."""
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise MapFormatError("not a P5 graymap")
    w, h = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    dtype = ">u2" if maxval > 255 else "u1"
    pix = np.frombuffer(parts[3], dtype=dtype).reshape(h, w)
    return maxval, pix.astype(np.int64)


@dataclass
class RunReport:
    kind: str
    scene: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    outputs: dict[str, Any] = field(default_factory=dict)
    bench: dict[str, Any] | None = None
    timing_ms: dict[str, float] = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "scene": self.scene,
            "config": self.config,
            "outputs": self.outputs,
        }
        if self.bench is not None:
            d["bench"] = self.bench
        d["timing_ms"] = self.timing_ms
        return d


def scene_summary(grid: GridMap, sources: SourceSet, targets) -> dict[str, Any]:
    return {
        "width": grid.width,
        "height": grid.height,
        "obstacles": grid.obstacle_count(),
        "sources": len(sources),
        "targets": len(targets),
    }


def write_report(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def read_report(text: str) -> RunReport:
    d = json.loads(text)
    if d.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise MapFormatError(f"unsupported report schema_version {d.get('schema_version')!r}")
    return RunReport(
        kind=d["kind"],
        scene=d["scene"],
        config=d["config"],
        outputs=d["outputs"],
        bench=d.get("bench"),
        timing_ms=d.get("timing_ms", {}),
        schema_version=d["schema_version"],
    )
