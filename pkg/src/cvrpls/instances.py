"""CVRP instance parsing, distance matrices, granular neighbor lists.

Instances come from CVRPLIB/TSPLIB-style text files (NODE_COORD_SECTION with
EUC_2D weights, or an explicit full matrix). The depot is always remapped to
index 0 internally, customers to 1..n, regardless of the numbering used in
the file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ParseError(ValueError):
    """Instance file rejected; carries the offending line number and field."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field}")
        super().__init__(message + (f" ({', '.join(loc)})" if loc else ""))


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    capacity: int
    demands: np.ndarray  # int64, length n+1, demands[0] == 0
    coords: np.ndarray | None  # (n+1, 2) float64 for rounded-euclidean instances
    explicit: np.ndarray | None  # (n+1, n+1) int64 for explicit-matrix instances
    edge_weight_kind: str  # "rounded-euclidean" | "explicit-matrix"

    @property
    def n(self) -> int:
        return len(self.demands) - 1


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray  # (n+1, n+1) int64, zero diagonal
    symmetric: bool


@dataclass(frozen=True)
class NeighborLists:
    gamma: int
    neighbors: np.ndarray  # (n+1, width) int32; row 0 (depot) unused, filled with -1


def _tokenize(text: str) -> list[tuple[int, str]]:
    out = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s:
            out.append((ln, s))
    return out


def parse_cvrplib(source: str) -> ProblemInstance:
    """Parse a CVRPLIB/TSPLIB document given as text.

    Recognizes the header keys NAME, DIMENSION, CAPACITY, EDGE_WEIGHT_TYPE
    (EUC_2D or EXPLICIT with a FULL_MATRIX section) and the NODE_COORD_SECTION,
    DEMAND_SECTION, DEPOT_SECTION, EDGE_WEIGHT_SECTION blocks.
    """
    lines = _tokenize(source)
    name = ""
    dimension: int | None = None
    capacity: int | None = None
    ew_type = "EUC_2D"
    ew_format = ""
    coords: dict[int, tuple[float, float]] = {}
    demands: dict[int, int] = {}
    depot_id: int | None = None
    matrix_vals: list[float] = []
    matrix_line0: int | None = None

    i = 0
    nl = len(lines)

    def header_val(s: str) -> str:
        return s.split(":", 1)[1].strip() if ":" in s else s.split(None, 1)[1].strip()

    while i < nl:
        ln, s = lines[i]
        up = s.upper()
        if up.startswith("NAME"):
            name = header_val(s)
        elif up.startswith("TYPE") and not up.startswith("EDGE_WEIGHT_TYPE"):
            pass  # CVRP / TSP marker, not load-bearing
        elif up.startswith("COMMENT"):
            pass
        elif up.startswith("DIMENSION"):
            try:
                dimension = int(header_val(s))
            except ValueError:
                raise ParseError("DIMENSION is not an integer", line=ln, field="DIMENSION")
        elif up.startswith("EDGE_WEIGHT_TYPE"):
            ew_type = header_val(s).upper()
            if ew_type not in ("EUC_2D", "EXPLICIT"):
                raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {ew_type}", line=ln, field="EDGE_WEIGHT_TYPE")
        elif up.startswith("EDGE_WEIGHT_FORMAT"):
            ew_format = header_val(s).upper()
        elif up.startswith("CAPACITY"):
            try:
                capacity = int(header_val(s))
            except ValueError:
                raise ParseError("CAPACITY is not an integer", line=ln, field="CAPACITY")
        elif up.startswith("NODE_COORD_SECTION"):
            i += 1
            while i < nl and not lines[i][1].upper().endswith("SECTION") and lines[i][1].upper() != "EOF" and lines[i][1] != "-1":
                ln2, s2 = lines[i]
                parts = s2.split()
                if len(parts) != 3:
                    raise ParseError("coordinate row needs 'id x y'", line=ln2, field="NODE_COORD_SECTION")
                try:
                    vid = int(parts[0])
                    x, y = float(parts[1]), float(parts[2])
                except ValueError:
                    raise ParseError("bad coordinate row", line=ln2, field="NODE_COORD_SECTION")
                if vid in coords:
                    raise ParseError(f"duplicate vertex id {vid}", line=ln2, field="NODE_COORD_SECTION")
                coords[vid] = (x, y)
                i += 1
            continue
        elif up.startswith("DEMAND_SECTION"):
            i += 1
            while i < nl and not lines[i][1].upper().endswith("SECTION") and lines[i][1].upper() != "EOF" and lines[i][1] != "-1":
                ln2, s2 = lines[i]
                parts = s2.split()
                if len(parts) != 2:
                    raise ParseError("demand row needs 'id q'", line=ln2, field="DEMAND_SECTION")
                try:
                    vid = int(parts[0])
                    q = int(parts[1])
                except ValueError:
                    raise ParseError("bad demand row", line=ln2, field="DEMAND_SECTION")
                if vid in demands:
                    raise ParseError(f"duplicate vertex id {vid}", line=ln2, field="DEMAND_SECTION")
                if q < 0:
                    raise ParseError("negative demand", line=ln2, field="DEMAND_SECTION")
                demands[vid] = q
                i += 1
            continue
        elif up.startswith("DEPOT_SECTION"):
            i += 1
            while i < nl and lines[i][1] != "-1" and lines[i][1].upper() != "EOF":
                ln2, s2 = lines[i]
                try:
                    did = int(s2.split()[0])
                except ValueError:
                    raise ParseError("bad depot row", line=ln2, field="DEPOT_SECTION")
                if depot_id is not None and did != depot_id:
                    raise ParseError("multiple depots are not supported", line=ln2, field="DEPOT_SECTION")
                depot_id = did
                i += 1
            if i < nl and lines[i][1] == "-1":
                i += 1  # section terminator
            continue
        elif up.startswith("EDGE_WEIGHT_SECTION"):
            matrix_line0 = ln
            i += 1
            while i < nl and not lines[i][1].upper().endswith("SECTION") and lines[i][1].upper() != "EOF":
                ln2, s2 = lines[i]
                for tok in s2.split():
                    try:
                        matrix_vals.append(float(tok))
                    except ValueError:
                        raise ParseError("bad matrix entry", line=ln2, field="EDGE_WEIGHT_SECTION")
                i += 1
            continue
        elif up == "EOF":
            break
        else:
            raise ParseError(f"unrecognized line: {s}", line=ln)
        i += 1

    if dimension is None:
        raise ParseError("missing DIMENSION", field="DIMENSION")
    if capacity is None:
        raise ParseError("missing CAPACITY", field="CAPACITY")
    if dimension < 2:
        raise ParseError("DIMENSION must be at least 2", field="DIMENSION")
    if not demands:
        raise ParseError("missing DEMAND_SECTION", field="DEMAND_SECTION")
    if depot_id is None:
        depot_id = 1

    if ew_type == "EUC_2D":
        if len(coords) != dimension:
            raise ParseError(
                f"NODE_COORD_SECTION has {len(coords)} rows, DIMENSION is {dimension}",
                field="NODE_COORD_SECTION",
            )
    else:
        if ew_format not in ("", "FULL_MATRIX"):
            raise ParseError(f"unsupported EDGE_WEIGHT_FORMAT {ew_format}", field="EDGE_WEIGHT_FORMAT")
        if len(matrix_vals) != dimension * dimension:
            raise ParseError(
                f"EDGE_WEIGHT_SECTION has {len(matrix_vals)} entries, expected {dimension * dimension}",
                line=matrix_line0,
                field="EDGE_WEIGHT_SECTION",
            )
    if len(demands) != dimension:
        raise ParseError(
            f"DEMAND_SECTION has {len(demands)} rows, DIMENSION is {dimension}", field="DEMAND_SECTION"
        )
    if depot_id not in demands:
        raise ParseError(f"depot id {depot_id} has no demand row", field="DEPOT_SECTION")
    if demands[depot_id] != 0:
        raise ParseError("depot demand must be 0", field="DEMAND_SECTION")

    # Remap: depot -> 0, customers -> 1..n in file order.
    file_ids = sorted(demands)
    customer_ids = [v for v in file_ids if v != depot_id]
    order = [depot_id] + customer_ids
    n = dimension - 1

    dem = np.zeros(n + 1, dtype=np.int64)
    for new_id, old_id in enumerate(order):
        q = demands[old_id]
        if new_id > 0 and q > capacity:
            raise ParseError(
                f"customer demand {q} exceeds capacity {capacity}", field="DEMAND_SECTION"
            )
        dem[new_id] = q

    if ew_type == "EUC_2D":
        cc = np.zeros((n + 1, 2), dtype=np.float64)
        for new_id, old_id in enumerate(order):
            if old_id not in coords:
                raise ParseError(f"vertex {old_id} has demand but no coordinates", field="NODE_COORD_SECTION")
            cc[new_id] = coords[old_id]
        return ProblemInstance(
            name=name, capacity=capacity, demands=dem, coords=cc, explicit=None,
            edge_weight_kind="rounded-euclidean",
        )

    raw = np.asarray(matrix_vals, dtype=np.float64).reshape(dimension, dimension)
    if not np.all(raw == np.floor(raw)):
        raise ParseError("explicit matrix entries must be integers", field="EDGE_WEIGHT_SECTION")
    # matrix rows follow ascending file id; reorder to depot-first
    pos = {oid: k for k, oid in enumerate(file_ids)}
    perm = np.array([pos[oid] for oid in order])
    mat = raw[np.ix_(perm, perm)].astype(np.int64)
    if np.any(mat < 0):
        raise ParseError("negative distance in explicit matrix", field="EDGE_WEIGHT_SECTION")
    return ProblemInstance(
        name=name, capacity=capacity, demands=dem, coords=None, explicit=mat,
        edge_weight_kind="explicit-matrix",
    )


def parse_cvrplib_file(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cvrplib(fh.read())


def build_distance_matrix(inst: ProblemInstance) -> DistanceMatrix:
    """Integer distance matrix. Euclidean distances round half up (floor(x + 0.5))."""
    if inst.edge_weight_kind == "explicit-matrix":
        d = inst.explicit.copy()
        np.fill_diagonal(d, 0)
        sym = bool(np.array_equal(d, d.T))
        return DistanceMatrix(d=d, symmetric=sym)
    if inst.coords is None:
        raise ValueError("rounded-euclidean instance without coordinates")
    dx = inst.coords[:, 0][:, None] - inst.coords[:, 0][None, :]
    dy = inst.coords[:, 1][:, None] - inst.coords[:, 1][None, :]
    d = np.floor(np.sqrt(dx * dx + dy * dy) + 0.5).astype(np.int64)
    np.fill_diagonal(d, 0)
    return DistanceMatrix(d=d, symmetric=True)


def build_neighbor_lists(dm: DistanceMatrix, gamma: int) -> NeighborLists:
    """Granular neighborhoods: for each customer, the gamma nearest other
    customers by outgoing distance, ties broken by lower vertex index."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    n = dm.d.shape[0] - 1
    width = min(gamma, n - 1) if n > 1 else 0
    nb = np.full((n + 1, max(width, 1)), -1, dtype=np.int32)
    idx = np.arange(1, n + 1)
    for i in range(1, n + 1):
        others = idx[idx != i]
        if len(others) == 0:
            continue
        row = dm.d[i, others]
        # lexsort: primary key distance, secondary key vertex index
        sel = others[np.lexsort((others, row))][:width]
        nb[i, : len(sel)] = sel
    return NeighborLists(gamma=gamma, neighbors=nb)


def parse_bks(path) -> dict[str, int]:
    """Sidecar best-known-solution table: one 'name<TAB>value' per line."""
    out: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split("\t")
            if len(parts) != 2:
                parts = s.split()
            if len(parts) != 2:
                raise ParseError("expected 'name<TAB>value'", line=ln, field="bks")
            try:
                out[parts[0]] = int(parts[1])
            except ValueError:
                raise ParseError("BKS value is not an integer", line=ln, field="bks")
    return out
