"""Circuit schemas: parameter sweep grids and performance metric lists.

The nine builtin schemas transcribe the sweep tables for the seven
homogeneous circuits and the two heterogeneous transceiver systems. Every
numeric range is stored in the unit printed next to it, so ``R_D`` of the
CSVA is in kΩ while ``R`` of the mixer is in Ω.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

UNITS = frozenset({"V", "kΩ", "Ω", "µm", "fF", "pF", "nH", "pH"})
SIGN_CONVENTIONS = ("strictly-positive", "signed")
SCHEMA_FORMAT_VERSION = 1


class CircuitId(str, enum.Enum):
    CSVA = "CSVA"
    CVA = "CVA"
    TSVA = "TSVA"
    LNA = "LNA"
    MIXER = "Mixer"
    VCO = "VCO"
    PA = "PA"
    TRANSMITTER = "Transmitter"
    RECEIVER = "Receiver"

    @classmethod
    def parse(cls, value: "str | CircuitId") -> "CircuitId":
        """Case-insensitive lookup, so ``"csva"`` and ``"Mixer"`` both work."""
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown circuit {value!r}; expected one of "
                         f"{', '.join(m.value for m in cls)}")

    @property
    def is_system(self) -> bool:
        return self in (CircuitId.TRANSMITTER, CircuitId.RECEIVER)


def _grid_eps(end: float) -> float:
    return 1e-9 * max(1.0, abs(end))


@dataclass(frozen=True)
class SweepRange:
    begin: float
    increment: float
    end: float

    def __post_init__(self):
        if not self.increment > 0:
            raise ValueError(f"increment must be positive, got {self.increment}")
        if not self.begin <= self.end:
            raise ValueError(f"begin {self.begin} exceeds end {self.end}")
        if not all(math.isfinite(v) for v in (self.begin, self.increment, self.end)):
            raise ValueError("sweep bounds must be finite")

    @property
    def count(self) -> int:
        return int(math.floor((self.end - self.begin) / self.increment
                              + _grid_eps(self.end))) + 1

    def values(self) -> list[float]:
        return expand_range(self)


def expand_range(rng: SweepRange) -> list[float]:
    """Expand ``[begin, increment, end]`` into its grid values.

    Values are computed as ``begin + i*increment`` (no accumulation) and
    rounded to 12 decimals so that e.g. ``0.6:0.05:0.9`` gives clean
    decimal points that survive a CSV round trip unchanged.
    """
    return [round(rng.begin + i * rng.increment, 12) for i in range(rng.count)]


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    unit: str
    range: SweepRange
    description: str = ""

    def __post_init__(self):
        if self.unit not in UNITS:
            raise ValueError(f"unit {self.unit!r} of {self.name} not in {sorted(UNITS)}")


@dataclass(frozen=True)
class MetricSpec:
    name: str
    unit: str
    sign_convention: str = "strictly-positive"

    def __post_init__(self):
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ValueError(f"bad sign convention {self.sign_convention!r}")


@dataclass(frozen=True)
class BlockSchema:
    """One functional block inside a heterogeneous system."""
    name: str
    parameters: tuple[ParameterSpec, ...]
    metrics: tuple[MetricSpec, ...]

    @property
    def parameter_names(self) -> list[str]:
        return [p.name for p in self.parameters]


@dataclass(frozen=True)
class CircuitSchema:
    circuit_id: CircuitId
    parameters: tuple[ParameterSpec, ...]
    metrics: tuple[MetricSpec, ...]
    blocks: tuple[BlockSchema, ...] | None = None
    system_metrics: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for kind, names in (("parameter", self.parameter_names),
                            ("metric", self.metric_names)):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {kind} names in {self.circuit_id.value}")
        if self.blocks is not None:
            flat = [p.name for b in self.blocks for p in b.parameters]
            if flat != self.parameter_names:
                raise ValueError("block parameters must partition the system parameters in order")

    @property
    def parameter_names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def metric_names(self) -> list[str]:
        return [m.name for m in self.metrics]

    @property
    def n_parameters(self) -> int:
        return len(self.parameters)

    @property
    def n_metrics(self) -> int:
        return len(self.metrics)

    def lower_bounds(self) -> np.ndarray:
        return np.array([p.range.begin for p in self.parameters])

    def upper_bounds(self) -> np.ndarray:
        return np.array([p.range.values()[-1] for p in self.parameters])

    def iter_grid(self) -> Iterator[tuple[float, ...]]:
        return itertools.product(*(p.range.values() for p in self.parameters))

    def grid(self) -> np.ndarray:
        """Full Cartesian sweep as an ``(n_points, n_parameters)`` array.

        Row order matches ``itertools.product`` over the parameters (the last
        parameter varies fastest).
        """
        axes = [np.asarray(p.range.values()) for p in self.parameters]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_dict(self) -> dict:
        def params(ps):
            return [{"name": p.name, "unit": p.unit, "description": p.description,
                     "range": [p.range.begin, p.range.increment, p.range.end]} for p in ps]

        def metrics(ms):
            return [{"name": m.name, "unit": m.unit, "sign_convention": m.sign_convention}
                    for m in ms]

        doc = {"format_version": SCHEMA_FORMAT_VERSION,
               "circuit_id": self.circuit_id.value,
               "parameters": params(self.parameters),
               "metrics": metrics(self.metrics)}
        if self.blocks is not None:
            doc["system_metrics"] = list(self.system_metrics)
            doc["blocks"] = [{"name": b.name,
                              "parameters": [p.name for p in b.parameters],
                              "metrics": [m.name for m in b.metrics]} for b in self.blocks]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "CircuitSchema":
        parameters = tuple(ParameterSpec(p["name"], p["unit"], SweepRange(*p["range"]),
                                         p.get("description", ""))
                           for p in doc["parameters"])
        metrics = tuple(MetricSpec(m["name"], m["unit"], m["sign_convention"])
                        for m in doc["metrics"])
        blocks = None
        if doc.get("blocks") is not None:
            pmap = {p.name: p for p in parameters}
            mmap = {m.name: m for m in metrics}
            blocks = tuple(BlockSchema(b["name"], tuple(pmap[n] for n in b["parameters"]),
                                       tuple(mmap[n] for n in b["metrics"]))
                           for b in doc["blocks"])
        return cls(CircuitId.parse(doc["circuit_id"]), parameters, metrics, blocks,
                   tuple(doc.get("system_metrics", ())))


def write_schema(schema: CircuitSchema, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def read_schema(path: str | Path) -> CircuitSchema:
    return CircuitSchema.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def sweep_cardinality(schema: CircuitSchema) -> int:
    return math.prod(p.range.count for p in schema.parameters)


# --- builtin tables ------------------------------------------------------------

def _p(name, lo, inc, hi, unit, description=""):
    return ParameterSpec(name, unit, SweepRange(lo, inc, hi), description)


def _m(name, unit, sign="strictly-positive"):
    return MetricSpec(name, unit, sign)


_AMP_METRICS = (_m("dc_power", "mW"), _m("bandwidth", "GHz"), _m("gain", "V/V"))

_HOMOGENEOUS = {
    CircuitId.CSVA: (
        (_p("VDD", 1.2, 0.1, 1.8, "V", "supply voltage"),
         _p("Vgate", 0.6, 0.05, 0.9, "V", "gate voltage"),
         _p("RD", 0.5, 0.1, 3, "kΩ", "load resistor"),
         _p("WN", 3, 1, 10, "µm", "width of nmos")),
        _AMP_METRICS),
    CircuitId.CVA: (
        (_p("RD", 0.5, 0.1, 2, "kΩ", "load resistor"),
         _p("WN1", 6, 1, 17, "µm", "width of nmos"),
         _p("WN2", 5, 1, 12, "µm", "width of nmos"),
         _p("WN3", 4.5, 0.5, 9, "µm", "width of nmos")),
        _AMP_METRICS),
    CircuitId.TSVA: (
        (_p("C1", 150, 50, 250, "fF", "miller capacitor"),
         _p("WP1", 10, 1, 18, "µm", "width of pmos"),
         _p("WP2", 7.5, 5, 22.5, "µm", "width of pmos"),
         _p("WN1", 10, 1, 18, "µm", "width of nmos"),
         _p("WN2", 7.5, 5, 22.5, "µm", "width of nmos"),
         _p("WN3", 16, 2, 24, "µm", "width of nmos")),
        (_m("dc_power", "mW"), _m("bandwidth", "MHz"), _m("gain", "V/V"))),
    CircuitId.LNA: (
        (_p("C1", 300, 100, 600, "fF", "output capacitor"),
         _p("C2", 200, 100, 500, "fF", "input capacitor"),
         _p("Ld", 3, 1, 5, "nH", "drain inductor"),
         _p("Lg", 8.4, 1, 11.4, "nH", "gate inductor"),
         _p("Ls", 0.6, 0.1, 0.8, "nH", "source inductor"),
         _p("WN1", 25, 1.25, 30, "µm", "width of nmos"),
         _p("WN2", 25, 1.25, 30, "µm", "width of nmos")),
        (_m("dc_power", "mW"), _m("bandwidth", "GHz"), _m("power_gain", "dB", "signed"),
         _m("s11", "dB", "signed"), _m("noise_figure", "dB"))),
    CircuitId.MIXER: (
        (_p("C", 0.5, 0.1, 1.5, "pF", "coupling capacitor"),
         _p("R", 200, 25, 500, "Ω", "load resistor"),
         _p("WN1", 15, 1, 25, "µm", "width of nmos"),
         _p("WN2", 5, 1, 15, "µm", "width of nmos")),
        (_m("dc_power", "mW"), _m("voltage_swing", "V"),
         _m("conversion_gain", "dB", "signed"), _m("noise_figure", "dB"))),
    CircuitId.VCO: (
        (_p("C", 100, 25, 200, "fF", "capacitor in resonant tank"),
         _p("L", 2, 1, 6, "nH", "inductor in resonant tank"),
         _p("Rp", 1, 1, 4, "kΩ", "parallel resistor"),
         _p("WN1", 24, 8, 56, "µm", "width of nmos"),
         _p("WN2", 11, 1, 12, "µm", "width of nmos"),
         _p("WN3", 96, 32, 160, "µm", "width of nmos"),
         _p("Wvar", 75, 12.5, 125, "µm", "width of nmos capacitor")),
        (_m("dc_power", "mW"), _m("frequency", "GHz"), _m("phase_noise", "dBc/Hz", "signed"),
         _m("tuning_range", "%"), _m("output_power", "dBm", "signed"))),
    CircuitId.PA: (
        (_p("Lip", 175, 175, 525, "pH", "input primary inductor"),
         _p("Lis", 40, 40, 120, "pH", "input secondary inductor"),
         _p("Lm", 87.5, 87.5, 263, "pH", "inter-stage matching inductor"),
         _p("Lop", 238, 238, 714, "pH", "output primary inductor"),
         _p("Los", 30, 30, 90, "pH", "output secondary inductor"),
         _p("WN1", 16, 3, 28, "µm", "width of nmos"),
         _p("WN2", 24, 4, 40, "µm", "width of nmos")),
        (_m("dc_power", "mW"), _m("s11", "dB", "signed"), _m("s22", "dB", "signed"),
         _m("power_gain", "dB", "signed"), _m("pae", "%"), _m("drain_efficiency", "%"),
         _m("p_sat", "dBm", "signed"))),
}

_SYSTEMS = {
    CircuitId.TRANSMITTER: (
        (_m("dc_power", "mW"), _m("bandwidth", "GHz"), _m("output_power", "dBm", "signed"),
         _m("voltage_swing", "V")),
        (("VCO",
          (_p("C", 50, 50, 150, "fF"), _p("L", 60, 60, 180, "pH"), _p("Rp", 300, 100, 500, "Ω"),
           _p("WN1", 7.5, 2.5, 12.5, "µm"), _p("WN2", 187.5, 12.5, 212.5, "µm"),
           _p("Wvar", 70, 10, 90, "µm")),
          (_m("vco_phase_noise", "dBc/Hz", "signed"), _m("vco_tuning_range", "%"))),
         ("PA",
          (_p("Lip", 175, 175, 350, "pH"), _p("Lis", 60, 60, 120, "pH"),
           _p("Lop", 360, 353, 713, "pH"), _p("Los", 45, 45, 90, "pH"),
           _p("WN3", 22, 5, 32, "µm"), _p("WN4", 16, 5, 26, "µm")),
          (_m("pa_power_gain", "dB", "signed"), _m("pa_drain_efficiency", "%"),
           _m("pa_pae", "%"))))),
    CircuitId.RECEIVER: (
        (_m("dc_power", "mW"), _m("gain", "dB", "signed"), _m("noise_figure", "dB")),
        (("LNA",
          (_p("C1", 130, 50, 180, "fF"), _p("C2", 170, 50, 220, "fF"),
           _p("Ld", 180, 50, 230, "pH"), _p("Lg", 850, 100, 950, "pH"),
           _p("Ls", 80, 10, 90, "pH"), _p("WN1", 20, 3, 26, "µm"),
           _p("WN2", 37.5, 2.5, 42.5, "µm")),
          (_m("lna_power_gain", "dB", "signed"), _m("lna_s11", "dB", "signed"),
           _m("lna_noise_figure", "dB"))),
         ("Mixer",
          (_p("C3", 1, 0.1, 1.1, "pF"), _p("R1", 400, 100, 500, "Ω"),
           _p("WN3", 14, 2, 18, "µm"), _p("WN4", 6, 2, 10, "µm")),
          (_m("mixer_voltage_swing", "V"), _m("mixer_conversion_gain", "dB", "signed"))),
         ("CVA",
          (_p("R2", 300, 100, 400, "Ω"), _p("WN5", 26, 2, 30, "µm"),
           _p("WN6", 14, 2, 18, "µm")),
          (_m("cva_gain", "dB", "signed"),)))),
}


def _build(circuit_id: CircuitId) -> CircuitSchema:
    if circuit_id in _HOMOGENEOUS:
        params, metrics = _HOMOGENEOUS[circuit_id]
        return CircuitSchema(circuit_id, params, metrics)
    system_metrics, block_defs = _SYSTEMS[circuit_id]
    blocks = tuple(BlockSchema(name, params, metrics) for name, params, metrics in block_defs)
    params = tuple(p for b in blocks for p in b.parameters)
    metrics = system_metrics + tuple(m for b in blocks for m in b.metrics)
    return CircuitSchema(circuit_id, params, metrics, blocks,
                         tuple(m.name for m in system_metrics))


_CACHE: dict[CircuitId, CircuitSchema] = {}


def builtin_schema(circuit_id: str | CircuitId) -> CircuitSchema:
    cid = CircuitId.parse(circuit_id)
    if cid not in _CACHE:
        _CACHE[cid] = _build(cid)
    return _CACHE[cid]


def all_schemas() -> list[CircuitSchema]:
    return [builtin_schema(c) for c in CircuitId]
