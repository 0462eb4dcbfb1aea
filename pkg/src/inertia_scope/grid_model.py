"""Static grid description and closed-form inertia bookkeeping.

Units: inertia constants in seconds on the machine MVA base, powers in MW/MVA,
branch susceptances in per-unit on the case base (``base_mva``), kinetic
energy in MWs.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import (
    DomainError,
    ImbalanceError,
    NoGeneratorError,
    ParseError,
    UnknownBusError,
    ValidationError,
)

DEFAULT_DAMPING_PU = 1.0
DEFAULT_DROOP = 0.05
DEFAULT_GOVERNOR_TG = 5.0
DEFAULT_XD_PU = 0.3
BALANCE_TOL_MW = 1e-6


@dataclass(frozen=True)
class ShaftRating:
    J: float  # kg m^2
    omega_n: float  # rad/s

    def __post_init__(self):
        if not self.J > 0:
            raise ValidationError("J", f"must be > 0, got {self.J}")
        if not self.omega_n > 0:
            raise ValidationError("omega_n", f"must be > 0, got {self.omega_n}")


@dataclass(frozen=True)
class GovernorParams:
    R: float = DEFAULT_DROOP
    T_g: float = DEFAULT_GOVERNOR_TG

    def __post_init__(self):
        if not self.R > 0:
            raise ValidationError("governor.R", f"must be > 0, got {self.R}")
        if not self.T_g > 0:
            raise ValidationError("governor.Tg_s", f"must be > 0, got {self.T_g}")


@dataclass(frozen=True)
class GeneratorUnit:
    bus: int
    H: float
    S_B: float
    P_set: float
    D: float = DEFAULT_DAMPING_PU
    governor: GovernorParams | None = field(default_factory=GovernorParams)
    synchronous: bool = True
    xd: float = DEFAULT_XD_PU  # transient reactance, pu on machine base
    damper: float = 0.0  # pu power per pu speed deviation from the COI
    name: str = ""

    @property
    def kinetic_energy(self) -> float:
        return self.H * self.S_B if self.synchronous else 0.0


@dataclass(frozen=True)
class NetworkBranch:
    from_bus: int
    to_bus: int
    b: float
    boundary: bool = False


@dataclass(frozen=True)
class LoadPoint:
    bus: int
    P: float
    D_f: float = 0.0  # MW/Hz


@dataclass(frozen=True)
class GridCase:
    f0: float
    buses: tuple[int, ...]
    generators: tuple[GeneratorUnit, ...]
    branches: tuple[NetworkBranch, ...]
    loads: tuple[LoadPoint, ...]
    base_mva: float = 100.0
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def S_B_total(self) -> float:
        return sum(g.S_B for g in self.generators if g.synchronous)

    @property
    def synchronous_units(self) -> list[GeneratorUnit]:
        return [g for g in self.generators if g.synchronous]

    @property
    def total_load(self) -> float:
        return sum(ld.P for ld in self.loads)

    @property
    def total_generation(self) -> float:
        return sum(g.P_set for g in self.generators)

    def bus_index(self, bus: int) -> int:
        try:
            return self._index[bus]
        except KeyError:
            raise UnknownBusError(f"bus {bus} is not in case {self.name!r}") from None

    @property
    def _index(self) -> dict[int, int]:
        idx = self.__dict__.get("_bus_index_cache")
        if idx is None:
            idx = {b: i for i, b in enumerate(self.buses)}
            object.__setattr__(self, "_bus_index_cache", idx)
        return idx

    def load_vector(self) -> np.ndarray:
        p = np.zeros(self.n_bus)
        for ld in self.loads:
            p[self.bus_index(ld.bus)] += ld.P
        return p

    def load_damping_vector(self) -> np.ndarray:
        d = np.zeros(self.n_bus)
        for ld in self.loads:
            d[self.bus_index(ld.bus)] += ld.D_f
        return d

    def replace(self, **changes) -> "GridCase":
        return dataclasses.replace(self, **changes)


# -- validation ---------------------------------------------------------------


def validate_case(case: GridCase, require_synchronous: bool = True) -> GridCase:
    """Check every GridCase invariant; raise naming the offending field."""
    if not case.f0 > 0:
        raise ValidationError("f0_hz", f"must be > 0, got {case.f0}")
    if not case.base_mva > 0:
        raise ValidationError("base_mva", f"must be > 0, got {case.base_mva}")
    if len(set(case.buses)) != len(case.buses):
        raise ValidationError("buses", "bus ids must be unique")
    known = set(case.buses)

    for i, g in enumerate(case.generators):
        where = f"generators[{i}]"
        if g.bus not in known:
            raise ValidationError(f"{where}.bus", f"unknown bus {g.bus}")
        if g.P_set < 0:
            raise ValidationError(f"{where}.P_mw", "must be >= 0")
        if g.D < 0:
            raise ValidationError(f"{where}.D_pu", "must be >= 0")
        if g.synchronous:
            if not g.H > 0:
                raise ValidationError(f"{where}.H_s", "synchronous unit needs H > 0")
            if not g.S_B > 0:
                raise ValidationError(f"{where}.S_mva", "synchronous unit needs S_B > 0")
            if not g.xd > 0:
                raise ValidationError(f"{where}.xd_pu", "must be > 0")
            if g.damper < 0:
                raise ValidationError(f"{where}.damper_pu", "must be >= 0")
        elif g.H != 0:
            raise ValidationError(f"{where}.H_s", "non-synchronous unit must have H = 0")

    for i, br in enumerate(case.branches):
        where = f"branches[{i}]"
        if br.from_bus not in known or br.to_bus not in known:
            raise ValidationError(where, f"unknown bus in {br.from_bus}-{br.to_bus}")
        if br.from_bus == br.to_bus:
            raise ValidationError(where, "from and to must differ")
        if not br.b > 0:
            raise ValidationError(f"{where}.b_pu", "must be > 0")

    for i, ld in enumerate(case.loads):
        where = f"loads[{i}]"
        if ld.bus not in known:
            raise ValidationError(f"{where}.bus", f"unknown bus {ld.bus}")
        if ld.P < 0:
            raise ValidationError(f"{where}.P_mw", "must be >= 0")
        if ld.D_f < 0:
            raise ValidationError(f"{where}.Df_mw_per_hz", "must be >= 0")

    if not _connected(case):
        raise ValidationError("branches", "branch graph is not connected")
    if require_synchronous and not case.synchronous_units:
        raise ValidationError("generators", "at least one synchronous generator required")

    mismatch = case.total_generation - case.total_load
    if abs(mismatch) > BALANCE_TOL_MW:
        raise ImbalanceError(
            f"generation {case.total_generation:.6f} MW != load "
            f"{case.total_load:.6f} MW (mismatch {mismatch:+.6f})"
        )
    return case


def _connected(case: GridCase) -> bool:
    if case.n_bus <= 1:
        return True
    adj = {b: set() for b in case.buses}
    for br in case.branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    seen = {case.buses[0]}
    stack = [case.buses[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == case.n_bus


# -- case files ---------------------------------------------------------------


def _schema() -> dict:
    text = resources.files("inertia_scope.data").joinpath("case.schema.json").read_text()
    return json.loads(text)


def bundled_case_path(name: str = "ieee24") -> Path:
    return Path(str(resources.files("inertia_scope.data").joinpath(f"{name}.json")))


def case_from_dict(doc: dict) -> GridCase:
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(where, exc.message) from None

    generators = []
    for g in doc["generators"]:
        if "governor" not in g:
            gov = GovernorParams()
        elif g["governor"] is None:
            gov = None
        else:
            gov = GovernorParams(
                R=g["governor"].get("R", DEFAULT_DROOP),
                T_g=g["governor"].get("Tg_s", DEFAULT_GOVERNOR_TG),
            )
        sync = g.get("synchronous", True)
        generators.append(
            GeneratorUnit(
                bus=g["bus"],
                H=float(g["H_s"]),
                S_B=float(g["S_mva"]),
                P_set=float(g["P_mw"]),
                D=float(g.get("D_pu", DEFAULT_DAMPING_PU)),
                governor=gov if sync else None,
                synchronous=sync,
                xd=float(g.get("xd_pu", DEFAULT_XD_PU)),
                damper=float(g.get("damper_pu", 0.0)),
                name=g.get("name", ""),
            )
        )
    branches = [
        NetworkBranch(br["from"], br["to"], float(br["b_pu"]), bool(br.get("boundary", False)))
        for br in doc["branches"]
    ]
    loads = [
        LoadPoint(ld["bus"], float(ld["P_mw"]), float(ld.get("Df_mw_per_hz", 0.0)))
        for ld in doc["loads"]
    ]
    buses = [b["id"] if isinstance(b, dict) else b for b in doc["buses"]]
    case = GridCase(
        f0=float(doc["f0_hz"]),
        buses=tuple(buses),
        generators=tuple(generators),
        branches=tuple(branches),
        loads=tuple(loads),
        base_mva=float(doc.get("base_mva", 100.0)),
        name=doc.get("name", ""),
        meta=doc.get("meta", {}),
    )
    return validate_case(case)


def load_case(path) -> GridCase:
    """Read and validate a JSON case file.

    ``path`` may also be the name of a bundled fixture (``"ieee24"``).
    """
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = bundled_case_path(str(path))
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise ParseError(f"case file not found: {p}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{p}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{p}: top level must be an object")
    return case_from_dict(doc)


def case_to_dict(case: GridCase) -> dict:
    def gen(g: GeneratorUnit) -> dict:
        gov = None if g.governor is None else {"R": g.governor.R, "Tg_s": g.governor.T_g}
        return {
            "name": g.name, "bus": g.bus, "H_s": g.H, "S_mva": g.S_B, "P_mw": g.P_set,
            "D_pu": g.D, "xd_pu": g.xd, "damper_pu": g.damper, "governor": gov, "synchronous": g.synchronous,
        }

    return {
        "name": case.name,
        "f0_hz": case.f0,
        "base_mva": case.base_mva,
        "buses": [{"id": b} for b in case.buses],
        "generators": [gen(g) for g in case.generators],
        "branches": [
            {"from": br.from_bus, "to": br.to_bus, "b_pu": br.b, "boundary": br.boundary}
            for br in case.branches
        ],
        "loads": [{"bus": ld.bus, "P_mw": ld.P, "Df_mw_per_hz": ld.D_f} for ld in case.loads],
        "meta": case.meta,
    }


# -- inertia bookkeeping ------------------------------------------------------


def shaft_kinetic_energy(r: ShaftRating) -> float:
    """Stored rotational energy at rated speed, in MWs."""
    return 0.5 * r.J * r.omega_n**2 / 1e6


def shaft_inertia_constant(r: ShaftRating, S_B: float) -> float:
    if not S_B > 0:
        raise DomainError(f"S_B must be > 0, got {S_B}")
    return shaft_kinetic_energy(r) / S_B


def system_kinetic_energy(case: GridCase) -> float:
    return float(sum(g.H * g.S_B for g in case.generators if g.synchronous))


def system_inertia_constant(case: GridCase) -> float:
    units = case.synchronous_units
    if not units:
        raise DomainError("no synchronous unit in case")
    return sum(g.H * g.S_B for g in units) / sum(g.S_B for g in units)


def penetration_fraction(case: GridCase) -> float:
    """Share of scheduled generation supplied by non-synchronous units."""
    total = case.total_generation
    if total <= 0:
        return 0.0
    return sum(g.P_set for g in case.generators if not g.synchronous) / total


def apply_renewable_penetration(case: GridCase, replaced_buses) -> GridCase:
    """Swap every generator at the listed buses for an inertia-less injection.

    Scheduled output is kept, so the power balance is untouched. Applying the
    same list twice gives the same case.
    """
    targets = set(replaced_buses)
    for bus in targets:
        case.bus_index(bus)
        if not any(g.bus == bus for g in case.generators):
            raise NoGeneratorError(f"bus {bus} hosts no generator")
    gens = tuple(
        dataclasses.replace(g, synchronous=False, H=0.0, governor=None)
        if g.bus in targets
        else g
        for g in case.generators
    )
    return case.replace(generators=gens)


def without_governors(case: GridCase) -> GridCase:
    return case.replace(
        generators=tuple(dataclasses.replace(g, governor=None) for g in case.generators)
    )


def susceptance_matrix(case: GridCase) -> np.ndarray:
    """Nodal susceptance matrix (per-unit), rows/cols in ``case.buses`` order."""
    n = case.n_bus
    B = np.zeros((n, n))
    for br in case.branches:
        i, j = case.bus_index(br.from_bus), case.bus_index(br.to_bus)
        B[i, i] += br.b
        B[j, j] += br.b
        B[i, j] -= br.b
        B[j, i] -= br.b
    return B


def boundary_branches(case: GridCase, area_buses) -> list[tuple[int, int]]:
    """Branches crossing the border of ``area_buses``.

    Returns ``(branch_index, sign)`` pairs; ``sign`` is +1 when the branch's
    from-to direction points into the area.
    """
    area = set(area_buses)
    out = []
    for k, br in enumerate(case.branches):
        a, b = br.from_bus in area, br.to_bus in area
        if a != b:
            out.append((k, 1 if b else -1))
    return out
