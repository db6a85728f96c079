"""
Problem data model: instances, paths, variants and file loading.

Nodes are numbered 0..n with 0 the depot. Edges are unordered pairs stored as
(i, j) tuples with i < j.
"""

import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path as FilePath
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .demand import (
    DemandDistribution,
    make_deterministic,
    make_discrete,
    make_poisson,
    make_triangular,
)
from .errors import InstanceFormatError, InstanceValidationError, InvalidPathError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Path = Tuple[int, ...]

FEASIBILITY_TOL = 1e-9
METRIC_TOL = 1e-12


def edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def path_edges(path: Sequence[int]) -> List[Edge]:
    """Customer-to-customer edges traversed by a path (depot legs excluded)."""
    return [edge(a, b) for a, b in zip(path[:-1], path[1:])]


def edges_within(customers: Iterable[int]) -> List[Edge]:
    """E(S): all edges with both ends in S."""
    return [edge(i, j) for i, j in combinations(sorted(customers), 2)]


def canonical_orientation(path: Sequence[int]) -> Path:
    """The lexicographically smaller of a path and its reverse."""
    forward = tuple(path)
    backward = forward[::-1]
    return min(forward, backward)


@dataclass(frozen=True)
class VariantConfig:
    """Fixed-route (|M| = 1) and expected-capacity (f = 1) switches."""
    frc_enabled: bool = True
    ecc_enabled: bool = True

    @classmethod
    def from_name(cls, name: str) -> "VariantConfig":
        try:
            return VARIANTS[name.lower()]
        except KeyError:
            raise InstanceValidationError(
                f"Unknown variant '{name}', expected one of {sorted(VARIANTS)}"
            ) from None

    @property
    def name(self) -> str:
        for key, value in VARIANTS.items():
            if value == self:
                return key
        return "custom"


VARIANTS: Dict[str, VariantConfig] = {
    "vrpsd": VariantConfig(frc_enabled=True, ecc_enabled=True),
    "ecc": VariantConfig(frc_enabled=False, ecc_enabled=True),
    "frc": VariantConfig(frc_enabled=True, ecc_enabled=False),
    "basic": VariantConfig(frc_enabled=False, ecc_enabled=False),
}


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable VRPSD instance."""
    n: int
    distance: np.ndarray
    demands: Tuple[DemandDistribution, ...]
    capacity: int
    load_factor: float
    fleet: Tuple[int, ...]
    penalty_failure: float = 0.0
    penalty_preventive: float = 0.0
    name: str = "instance"
    tags: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceValidationError(f"An instance needs at least one customer, got n={self.n}")
        dist = np.array(self.distance, dtype=float)
        if dist.shape != (self.n + 1, self.n + 1):
            raise InstanceValidationError(
                f"Distance matrix must be {self.n + 1}x{self.n + 1}, got {dist.shape}"
            )
        if np.any(dist < 0):
            raise InstanceValidationError("Distances must be non-negative")
        if not np.allclose(dist, dist.T, rtol=0.0, atol=1e-9):
            raise InstanceValidationError("Distance matrix must be symmetric")
        if np.any(np.abs(np.diag(dist)) > 1e-12):
            raise InstanceValidationError("Distance matrix must have a zero diagonal")
        dist = (dist + dist.T) / 2.0
        np.fill_diagonal(dist, 0.0)
        dist.setflags(write=False)
        object.__setattr__(self, "distance", dist)

        if len(self.demands) != self.n:
            raise InstanceValidationError(f"Expected {self.n} demand distributions, got {len(self.demands)}")
        object.__setattr__(self, "demands", tuple(self.demands))
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise InstanceValidationError(f"Capacity must be a positive integer, got {self.capacity}")
        if not self.load_factor > 0:
            raise InstanceValidationError(f"Load factor must be positive, got {self.load_factor}")
        if self.penalty_failure < 0 or self.penalty_preventive < 0:
            raise InstanceValidationError("Penalties must be non-negative")
        if self.penalty_preventive > self.penalty_failure:
            raise InstanceValidationError(
                f"Preventive penalty {self.penalty_preventive} exceeds failure penalty {self.penalty_failure}"
            )
        fleet = tuple(sorted(set(int(m) for m in self.fleet)))
        if not fleet or fleet[0] < 1 or fleet[-1] > self.n:
            raise InstanceValidationError(f"Fleet sizes must be a non-empty subset of 1..{self.n}, got {self.fleet}")
        object.__setattr__(self, "fleet", fleet)

        limit = self.load_factor * self.capacity
        for i, dist_i in enumerate(self.demands, start=1):
            if dist_i.mean > limit + FEASIBILITY_TOL:
                raise InstanceValidationError(
                    f"Customer {i} has mean demand {dist_i.mean} above fQ={limit}; no route can serve it"
                )

    # -- demand aggregates -------------------------------------------------

    @property
    def customers(self) -> List[int]:
        return list(range(1, self.n + 1))

    @property
    def means(self) -> np.ndarray:
        """Mean demand per node; index 0 (depot) is zero."""
        return np.array([0.0] + [d.mean for d in self.demands])

    @property
    def total_mean(self) -> float:
        return float(sum(d.mean for d in self.demands))

    @property
    def route_limit(self) -> float:
        return self.load_factor * self.capacity

    def demand(self, i: int) -> DemandDistribution:
        return self.demands[i - 1]

    def set_mean(self, customers: Iterable[int]) -> float:
        return float(sum(self.demands[i - 1].mean for i in customers))

    def min_vehicles(self, customers: Optional[Iterable[int]] = None) -> int:
        """⌈Σμ / fQ⌉ over the given customers (all by default)."""
        total = self.total_mean if customers is None else self.set_mean(customers)
        return max(1, math.ceil(total / self.route_limit - FEASIBILITY_TOL))

    def is_iid(self, customers: Optional[Iterable[int]] = None) -> bool:
        members = self.customers if customers is None else sorted(customers)
        first = self.demands[members[0] - 1]
        return all(first.same_law(self.demands[i - 1]) for i in members[1:])

    def is_poisson(self, customers: Optional[Iterable[int]] = None) -> bool:
        members = self.customers if customers is None else customers
        return all(self.demands[i - 1].kind == "poisson" for i in members)

    # -- costs -------------------------------------------------------------

    def cost(self, i: int, j: int) -> float:
        return float(self.distance[i, j])

    def edge_cost(self, e: Edge) -> float:
        return float(self.distance[e[0], e[1]])

    def preventive_cost(self, i: int, j: int) -> float:
        """c^P_ij = b^P + c_0i + c_0j - c_ij."""
        if i == j:
            raise InvalidPathError(f"Preventive cost needs two distinct customers, got {i} twice")
        self._check_customer(i)
        self._check_customer(j)
        return float(
            self.penalty_preventive + self.distance[0, i] + self.distance[0, j] - self.distance[i, j]
        )

    def failure_cost(self, i: int) -> float:
        """c^F_i = b^F + 2 c_0i."""
        self._check_customer(i)
        return float(self.penalty_failure + 2.0 * self.distance[0, i])

    def route_cost(self, path: Sequence[int]) -> float:
        """First-stage cost of the route (0, path, 0)."""
        nodes = [0, *path, 0]
        return float(sum(self.distance[a, b] for a, b in zip(nodes[:-1], nodes[1:])))

    def _check_customer(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise InvalidPathError(f"Customer index {i} outside 1..{self.n}")

    def __repr__(self) -> str:
        return (
            f"Instance(name={self.name!r}, n={self.n}, Q={self.capacity}, f={self.load_factor:g}, "
            f"M={list(self.fleet)}, bF={self.penalty_failure:g}, bP={self.penalty_preventive:g})"
        )


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

def validate_path(instance: Instance, path: Sequence[int]) -> Path:
    """Return the path as a tuple; raise InvalidPathError when empty, repeated or out of range."""
    try:
        seq = tuple(int(i) for i in path)
    except (TypeError, ValueError) as e:
        raise InvalidPathError(f"Path must be a sequence of customer indices: {e}") from None
    if not seq:
        raise InvalidPathError("Path is empty")
    if len(set(seq)) != len(seq):
        raise InvalidPathError(f"Path {list(seq)} repeats a customer")
    for i in seq:
        if not 1 <= i <= instance.n:
            raise InvalidPathError(f"Path {list(seq)} references unknown customer {i}")
    return seq


def path_is_feasible(instance: Instance, path: Sequence[int]) -> bool:
    """Σμ over the path fits the expected capacity fQ."""
    return instance.set_mean(path) <= instance.route_limit + FEASIBILITY_TOL


# ---------------------------------------------------------------------------
# Metric closure and variants
# ---------------------------------------------------------------------------

def normalize_metric(instance: Instance) -> Instance:
    """All-pairs shortest-path closure of the distance matrix (Floyd-Warshall)."""
    dist = np.array(instance.distance, dtype=float)
    for k in range(dist.shape[0]):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    if np.array_equal(dist, instance.distance):
        return instance
    changed = int(np.count_nonzero(np.abs(dist - instance.distance) > METRIC_TOL)) // 2
    logger.info(f"Metric closure shortened {changed} edge(s) of {instance.name}")
    return replace(instance, distance=dist)


def satisfies_triangle_inequality(instance: Instance, tol: float = METRIC_TOL) -> bool:
    d = instance.distance
    # axes (i, k, j): d_ij <= d_ik + d_kj
    return bool(np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + tol))


def derive_variant(instance: Instance, variant: VariantConfig) -> Instance:
    """Set (f, M) for a variant.

    ECC fixes f = 1, otherwise f = Σμ/Q. FRC keeps a single fleet size, otherwise
    M = {⌈Σμ/(fQ)⌉, ..., n}.
    """
    if variant.ecc_enabled:
        load_factor = 1.0
    else:
        load_factor = instance.total_mean / instance.capacity
    limit = load_factor * instance.capacity
    for i, dist_i in enumerate(instance.demands, start=1):
        if dist_i.mean > limit + FEASIBILITY_TOL:
            raise InstanceValidationError(
                f"Variant {variant.name}: customer {i} mean {dist_i.mean} exceeds fQ={limit}"
            )
    m_min = max(1, math.ceil(instance.total_mean / limit - FEASIBILITY_TOL))
    if variant.frc_enabled:
        if len(instance.fleet) == 1 and instance.fleet[0] >= m_min:
            fleet = instance.fleet
        else:
            fleet = (m_min,)
    else:
        fleet = tuple(range(m_min, instance.n + 1))
    logger.debug(f"Variant {variant.name} of {instance.name}: f={load_factor:g}, M={list(fleet)}")
    return replace(instance, load_factor=load_factor, fleet=fleet)


# ---------------------------------------------------------------------------
# Native JSON format
# ---------------------------------------------------------------------------

def _parse_demand(doc: Dict[str, Any], index: int) -> DemandDistribution:
    kind = doc.get("type")
    try:
        if kind == "poisson":
            cap = doc.get("cap")
            return make_poisson(float(doc["lambda"]), cap=None if cap is None else int(cap))
        if kind == "discrete":
            return make_discrete(doc["support"], doc["mass"])
        if kind == "triangular":
            return make_triangular(int(doc["center"]), int(doc["halfwidth"]))
        if kind == "deterministic":
            return make_deterministic(int(doc["value"]))
    except KeyError as e:
        raise InstanceFormatError(f"Demand {index}: missing field {e}") from None
    raise InstanceFormatError(f"Demand {index}: unknown type {kind!r}")


def _dump_demand(dist: DemandDistribution) -> Dict[str, Any]:
    if dist.kind == "poisson":
        return {"type": "poisson", "lambda": dist.params["lambda"]}
    if dist.kind == "capped-poisson":
        return {"type": "poisson", "lambda": dist.params["lambda"], "cap": dist.params["cap"]}
    if dist.kind == "triangular":
        return {"type": "triangular", "center": dist.params["center"], "halfwidth": dist.params["halfwidth"]}
    return {
        "type": "discrete",
        "support": [int(s) for s in dist.support],
        "mass": [float(m) for m in dist.mass],
    }


def parse_instance(doc: Dict[str, Any], name: str = "instance", normalize: bool = True) -> Instance:
    """Build an Instance from a native JSON document."""
    if not isinstance(doc, dict):
        raise InstanceFormatError("Instance document must be a JSON object")
    try:
        n = int(doc["n"])
        distance = np.asarray(doc["distance"], dtype=float)
        capacity = doc["Q"]
        raw_demands = doc["demands"]
    except KeyError as e:
        raise InstanceFormatError(f"Instance document is missing field {e}") from None
    except (TypeError, ValueError) as e:
        raise InstanceFormatError(f"Instance document has a malformed field: {e}") from None

    if not isinstance(raw_demands, list) or len(raw_demands) != n:
        raise InstanceFormatError(f"Expected a list of {n} demands")
    demands = tuple(_parse_demand(d, i) for i, d in enumerate(raw_demands, start=1))
    total = sum(d.mean for d in demands)

    f_raw = doc.get("f", 1.0)
    load_factor = total / capacity if f_raw == "auto" else float(f_raw)
    m_raw = doc.get("M", "auto")
    if m_raw == "auto":
        m_min = max(1, math.ceil(total / (load_factor * capacity) - FEASIBILITY_TOL))
        fleet = tuple(range(m_min, n + 1))
    else:
        fleet = tuple(int(m) for m in m_raw)

    instance = Instance(
        n=n,
        distance=distance,
        demands=demands,
        capacity=capacity,
        load_factor=load_factor,
        fleet=fleet,
        penalty_failure=float(doc.get("bF", 0.0)),
        penalty_preventive=float(doc.get("bP", 0.0)),
        name=str(doc.get("name", name)),
    )
    return normalize_metric(instance) if normalize else instance


def dump_instance(instance: Instance) -> Dict[str, Any]:
    """Native JSON document of an instance."""
    return {
        "name": instance.name,
        "n": instance.n,
        "distance": instance.distance.tolist(),
        "Q": int(instance.capacity),
        "f": float(instance.load_factor),
        "M": list(instance.fleet),
        "bF": float(instance.penalty_failure),
        "bP": float(instance.penalty_preventive),
        "demands": [_dump_demand(d) for d in instance.demands],
    }


# ---------------------------------------------------------------------------
# CVRPLIB format
# ---------------------------------------------------------------------------

def tsplib_round(x: float) -> float:
    return float(math.floor(x + 0.5))


def _read_explicit(entries: List[float], dimension: int, layout: str) -> np.ndarray:
    matrix = np.zeros((dimension, dimension))
    if layout == "FULL_MATRIX":
        cells = [(i, j) for i in range(dimension) for j in range(dimension)]
    elif layout == "LOWER_ROW":
        cells = [(i, j) for i in range(1, dimension) for j in range(i)]
    elif layout == "LOWER_DIAG_ROW":
        cells = [(i, j) for i in range(dimension) for j in range(i + 1)]
    elif layout == "UPPER_ROW":
        cells = [(i, j) for i in range(dimension - 1) for j in range(i + 1, dimension)]
    elif layout == "UPPER_DIAG_ROW":
        cells = [(i, j) for i in range(dimension) for j in range(i, dimension)]
    else:
        raise InstanceFormatError(f"Unsupported EDGE_WEIGHT_FORMAT {layout}")
    if len(entries) < len(cells):
        raise InstanceFormatError(
            f"EDGE_WEIGHT_SECTION has {len(entries)} entries, {layout} needs {len(cells)}"
        )
    for (i, j), value in zip(cells, entries):
        matrix[i, j] = value
        if layout != "FULL_MATRIX":
            matrix[j, i] = value
    return matrix


def parse_cvrplib(
    text: str,
    sidecar: Optional[Dict[str, Any]] = None,
    round_distances: bool = False,
    name: str = "instance",
    normalize: bool = True,
) -> Instance:
    """Parse a CVRPLIB .vrp file; the sidecar names the demand family."""
    sidecar = sidecar or {}
    header: Dict[str, str] = {}
    sections: Dict[str, List[List[str]]] = {}
    current: Optional[str] = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line == "EOF":
            continue
        match = re.match(r"^([A-Z_]+)\s*:\s*(.*)$", line)
        if match:
            header[match.group(1)] = match.group(2).strip()
            current = None
            continue
        if re.match(r"^[A-Z_]+$", line):
            current = line
            sections[current] = []
            continue
        if current is None:
            raise InstanceFormatError(f"Unexpected line outside any section: {line!r}")
        sections[current].append(line.split())

    try:
        dimension = int(header["DIMENSION"])
        capacity = int(float(header["CAPACITY"]))
    except (KeyError, ValueError) as e:
        raise InstanceFormatError(f"CVRPLIB header is missing or malformed: {e}") from None

    try:
        demand_rows = {int(r[0]): float(r[1]) for r in sections["DEMAND_SECTION"]}
        depot_ids = [int(r[0]) for r in sections.get("DEPOT_SECTION", []) if int(r[0]) > 0]
    except (KeyError, IndexError, ValueError) as e:
        raise InstanceFormatError(f"CVRPLIB DEMAND_SECTION is missing or malformed: {e}") from None
    ids = sorted(demand_rows)
    if len(ids) != dimension:
        raise InstanceFormatError(f"DEMAND_SECTION lists {len(ids)} nodes, DIMENSION is {dimension}")
    depot = depot_ids[0] if depot_ids else ids[0]
    # depot first, customers in file order
    order = [depot] + [i for i in ids if i != depot]

    weight_type = header.get("EDGE_WEIGHT_TYPE", "EUC_2D").upper()
    if weight_type in ("EUC_2D", "CEIL_2D"):
        try:
            coords = {int(r[0]): (float(r[1]), float(r[2])) for r in sections["NODE_COORD_SECTION"]}
            xy = np.array([coords[i] for i in order])
        except (KeyError, IndexError, ValueError) as e:
            raise InstanceFormatError(f"NODE_COORD_SECTION is missing or malformed: {e}") from None
        distance = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2))
        if weight_type == "CEIL_2D":
            distance = np.ceil(distance)
    elif weight_type == "EXPLICIT":
        layout = header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
        try:
            entries = [float(v) for row in sections["EDGE_WEIGHT_SECTION"] for v in row]
        except (KeyError, ValueError) as e:
            raise InstanceFormatError(f"EDGE_WEIGHT_SECTION is missing or malformed: {e}") from None
        full = _read_explicit(entries, dimension, layout)
        positions = [ids.index(i) for i in order]
        distance = full[np.ix_(positions, positions)]
    else:
        raise InstanceFormatError(f"Unsupported EDGE_WEIGHT_TYPE {weight_type}")
    if round_distances:
        distance = np.vectorize(tsplib_round)(distance)

    family = sidecar.get("distribution", "poisson")
    demands = []
    for i in order[1:]:
        value = demand_rows[i]
        if family == "poisson":
            if value <= 0:
                raise InstanceValidationError(f"Customer {i} has non-positive Poisson mean {value}")
            demands.append(make_poisson(value))
        elif family == "deterministic":
            if value != int(value):
                raise InstanceValidationError(f"Customer {i} has non-integer deterministic demand {value}")
            demands.append(make_deterministic(int(value)))
        else:
            raise InstanceFormatError(f"Unknown sidecar distribution {family!r}")

    n = dimension - 1
    doc_name = header.get("NAME", name)
    total = sum(d.mean for d in demands)
    f_raw = sidecar.get("f", 1.0)
    load_factor = total / capacity if f_raw == "auto" else float(f_raw)
    m_raw = sidecar.get("M", "auto")
    if m_raw == "auto":
        m_min = max(1, math.ceil(total / (load_factor * capacity) - FEASIBILITY_TOL))
        fleet = tuple(range(m_min, n + 1))
    else:
        fleet = tuple(int(m) for m in m_raw)

    instance = Instance(
        n=n,
        distance=distance,
        demands=tuple(demands),
        capacity=capacity,
        load_factor=load_factor,
        fleet=fleet,
        penalty_failure=float(sidecar.get("bF", 0.0)),
        penalty_preventive=float(sidecar.get("bP", 0.0)),
        name=doc_name,
    )
    return normalize_metric(instance) if normalize else instance


def load_instance(
    source: Union[str, FilePath],
    fmt: Optional[str] = None,
    sidecar: Optional[Union[str, FilePath, Dict[str, Any]]] = None,
    round_distances: bool = False,
    normalize: bool = True,
) -> Instance:
    """Load an instance from a native JSON file or a CVRPLIB .vrp file.

    The format is taken from fmt or the file extension. For CVRPLIB files the
    sidecar defaults to <file>.json next to the .vrp file when present.
    """
    path = FilePath(source)
    if not path.exists():
        raise InstanceFormatError(f"Instance file not found: {path}")
    fmt = (fmt or ("cvrplib" if path.suffix.lower() == ".vrp" else "json")).lower()
    text = path.read_text()

    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise InstanceFormatError(f"{path}: invalid JSON: {e}") from None
        return parse_instance(doc, name=path.stem, normalize=normalize)

    if fmt == "cvrplib":
        if sidecar is None:
            default_sidecar = path.with_suffix(".json")
            sidecar = default_sidecar if default_sidecar.exists() else {}
        if not isinstance(sidecar, dict):
            try:
                sidecar = json.loads(FilePath(sidecar).read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise InstanceFormatError(f"Sidecar {sidecar}: {e}") from None
        return parse_cvrplib(
            text, sidecar=sidecar, round_distances=round_distances, name=path.stem, normalize=normalize
        )

    raise InstanceFormatError(f"Unknown instance format {fmt!r}, expected 'json' or 'cvrplib'")
