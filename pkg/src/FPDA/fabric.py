"""
The reconfigurable array: a fixed pool of Common Modules, the configuration decoder, and
resource accounting.

One configuration is active at a time. :func:`configure` builds the netlist of a mode, checks
it against the pool and claims its CMs; :func:`release` returns them. :func:`execute` runs data
through a configured netlist, :func:`account` compares its census with the published per-mode
counts.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
import yaml

from .cosine import derive_decomposition
from .errors import AlreadyConfigured, ArityMismatch, NotConfigured, PoolExhausted
from .filter_bank import MAX_TAPS, FirSpec, IirSpec
from .fourier import FftPlan
from .mapping import build_netlist
from .netlist import COUNTED_KINDS, Netlist, Simulator
from .numerics import Tally
from .sampleio import atomic_write
from .wavelet import DilationPair

_logger = logging.getLogger(__name__)


class ConfigMode(Enum):
    FIR = "FIR"
    IIR = "IIR"
    DCT = "DCT"
    FFT = "FFT"
    DWT = "DWT"

    @classmethod
    def parse(cls, name: Union[str, "ConfigMode"]) -> "ConfigMode":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).upper())
        except ValueError:
            known = [m.value for m in cls]
            raise ValueError(f"ConfigMode.parse: unknown mode {name!r}, expected one of {known}") from None


@dataclass(frozen=True)
class ControlWord:
    """Decoder outputs C1..C5"""

    c1: int = 0
    c2: int = 0
    c3: int = 0
    c4: int = 0
    c5: int = 0

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits) or sum(self.bits) > 1:
            raise ValueError(f"ControlWord: {self.bits} is neither one-hot nor idle")

    @property
    def bits(self) -> Tuple[int, ...]:
        return (self.c1, self.c2, self.c3, self.c4, self.c5)

    @property
    def idle(self) -> bool:
        return sum(self.bits) == 0

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


IDLE = ControlWord()

CONTROL_WORDS: Dict[ConfigMode, Tuple[int, ...]] = {
    ConfigMode.FIR: (1, 0, 0, 0, 0),
    ConfigMode.IIR: (0, 1, 0, 0, 0),
    ConfigMode.DCT: (0, 0, 1, 0, 0),
    ConfigMode.FFT: (0, 0, 0, 1, 0),
    ConfigMode.DWT: (0, 0, 0, 0, 1),
}

PUBLISHED_CENSUS: Dict[ConfigMode, Dict[str, int]] = {
    ConfigMode.FIR: {"adder": 31, "lut": 32, "register": 16, "mux2": 1},
    ConfigMode.IIR: {"adder": 62, "lut": 62, "register": 31, "mux2": 1},
    ConfigMode.DWT: {"adder": 8, "lut": 8, "register": 9, "counter1": 1},
    ConfigMode.FFT: {"adder": 16, "subtractor": 24, "register": 48, "mux4": 16, "mux2": 14, "multiplier": 24},
    ConfigMode.DCT: {"adder": 44, "lut": 24, "subtractor": 36, "register": 32, "mux2": 8},
}

POOL_SIZES: Dict[str, int] = {
    "counter1": 1,
    "adder": 62,
    "lut": 94,
    "subtractor": 36,
    "multiplier": 24,
    "register": 48,
    "mux4": 16,
    "mux2": 14,
}

CENSUS_NOTES: Dict[ConfigMode, Dict[str, str]] = {
    ConfigMode.FIR: {},
    ConfigMode.IIR: {
        "adder": (
            "31 forward + 29 feedback + 1 path join; both roundings are output scaling, so no adder is "
            "spent on the Q1.7 feedback"
        ),
        "lut": "32 forward + 30 feedback: the feedback FIR has 15 taps b[1..15]",
    },
    ConfigMode.DWT: {
        "lut": (
            "each coefficient unit needs a low- and a high-nibble table for 8-bit samples, so 8 taps use "
            "16 tables held in 8 counter-addressed banks; the published 8 counts one table per tap"
        ),
        "register": (
            "7 delay registers + 1 parallel-load register; the banks read delays 0, 2, 4 and 6, so an "
            "eighth delay would drive nothing"
        ),
    },
    ConfigMode.FFT: {
        "mux2": "two twiddle selects for each butterfly except butterfly 0, which always uses W0",
    },
    ConfigMode.DCT: {
        "lut": (
            "one bit-plane table per output row of each 4-column block; a unit per matrix entry "
            "would need 192 tables and 188 adders"
        ),
        "register": "8 folded-sum latches + 24 row accumulators",
    },
}

POOL_NOTES = {
    "lut": "94 exceeds the largest single-mode need (62, IIR); the pool keeps the published total",
    "register": "sized to the largest single-mode need (48, FFT)",
    "mux4": "sized to the largest single-mode need (16, FFT)",
    "mux2": "sized to the largest single-mode need (14, FFT)",
}


def decode(mode: Union[str, ConfigMode]) -> ControlWord:
    return ControlWord(*CONTROL_WORDS[ConfigMode.parse(mode)])


class CmPool:
    """Fixed CM inventory with the active configuration, if any"""

    def __init__(self, sizes: Optional[Dict[str, int]] = None) -> None:
        self.sizes: Dict[str, int] = dict(POOL_SIZES if sizes is None else sizes)
        self.used: Counter = Counter()
        self.mode: Optional[ConfigMode] = None
        self.netlist: Optional[Netlist] = None
        self.control: ControlWord = IDLE

    @property
    def active(self) -> bool:
        return self.mode is not None

    def free(self, kind: str) -> int:
        return self.sizes.get(kind, 0) - self.used[kind]

    def conserved(self) -> bool:
        return all(self.used[k] + self.free(k) == self.sizes[k] and self.free(k) >= 0 for k in self.sizes)

    def __repr__(self) -> str:
        state = self.mode.value if self.mode else "idle"
        return f"CmPool({state}, used={dict(self.used)})"


def default_spec(mode: Union[str, ConfigMode]) -> Any:
    """Parameters used when a mode is configured without any: 16-tap averagers, the Daubechies pair"""
    mode = ConfigMode.parse(mode)
    if mode is ConfigMode.FIR:
        return FirSpec.from_floats([1.0 / MAX_TAPS] * MAX_TAPS)
    if mode is ConfigMode.IIR:
        return IirSpec.from_floats([1.0 / MAX_TAPS] * MAX_TAPS, [0.0] * (MAX_TAPS - 1))
    if mode is ConfigMode.DWT:
        return DilationPair.daubechies8()
    if mode is ConfigMode.FFT:
        return FftPlan()
    return derive_decomposition()


def configure(
    pool: CmPool, mode: Union[str, ConfigMode], spec: Any = None, branch: str = "lowpass"
) -> Netlist:
    """Build the netlist of ``mode`` from pool CMs

    Args:
        pool (CmPool): must be idle
        mode (ConfigMode or str): FIR, IIR, DCT, FFT or DWT
        spec: FirSpec, IirSpec, DilationPair, FftPlan or DctDecomposition; defaults per mode
        branch (str): DWT branch, "lowpass" or "highpass"

    Returns:
        Netlist: validated and claimed

    Raises:
        AlreadyConfigured: if the pool already holds a configuration
        PoolExhausted: if any CM kind runs out; nothing is claimed in that case
    """
    mode = ConfigMode.parse(mode)
    if pool.active:
        raise AlreadyConfigured(f"configure: pool is configured for {pool.mode.value}, release it first")
    netlist = build_netlist(mode.value, default_spec(mode) if spec is None else spec, branch)
    netlist.validate()
    census = netlist.census()
    for kind, needed in census.items():
        if needed > pool.free(kind):
            raise PoolExhausted(kind, needed, pool.free(kind))
    pool.used.update(census)
    pool.mode = mode
    pool.netlist = netlist
    pool.control = decode(mode)
    _logger.info(f"configure: {mode.value} with control word {pool.control}, {len(netlist)} nodes")
    return netlist


def release(pool: CmPool) -> CmPool:
    """Return every claimed CM and go idle

    Raises:
        NotConfigured: if the pool is idle
    """
    if not pool.active:
        raise NotConfigured("release: pool has no active configuration")
    _logger.debug(f"release: {pool.mode.value}")
    pool.used.clear()
    pool.mode = None
    pool.netlist = None
    pool.control = IDLE
    return pool


def execute(netlist: Netlist, inputs: Sequence[Any], tally: Optional[Tally] = None) -> List[Any]:
    """Run samples through a netlist tick by tick

    Streaming netlists (FIR, IIR, DWT) take one sample per tick; block netlists (FFT, DCT) take a
    flat stream whose length is a multiple of the block size and return the outputs block after
    block.

    Raises:
        ArityMismatch: if the stream does not fit the netlist's ports
    """
    if not netlist.output_ports:
        raise ArityMismatch(f"execute: {netlist.name} has no output ports")
    return Simulator(netlist, tally).run(list(inputs))


@dataclass(frozen=True)
class ResourceRow:
    kind: str
    used: int
    pool: int
    expected: int
    note: str = ""

    @property
    def match(self) -> bool:
        return self.used == self.expected


@dataclass(frozen=True)
class ResourceReport:
    """Census of one netlist against the pool and the published counts"""

    mode: Optional[str]
    rows: Tuple[ResourceRow, ...]
    notes: Tuple[str, ...] = field(default=())

    def row(self, kind: str) -> ResourceRow:
        for r in self.rows:
            if r.kind == kind:
                return r
        raise KeyError(f"ResourceReport.row: no row for {kind!r}")

    @property
    def matches(self) -> bool:
        return all(r.match for r in self.rows)

    @property
    def unexplained(self) -> List[str]:
        """Kinds that differ from the published count without a note"""
        return [r.kind for r in self.rows if not r.match and not r.note]

    @property
    def within_pool(self) -> bool:
        return all(r.used <= r.pool for r in self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {"kind": r.kind, "used": r.used, "pool": r.pool, "expected": r.expected, "match": r.match}
                for r in self.rows
            ]
        ).set_index("kind")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "rows": {
                r.kind: {"used": r.used, "pool": r.pool, "expected": r.expected, "match": r.match, "note": r.note}
                for r in self.rows
            },
            "notes": list(self.notes),
        }

    def render(self) -> str:
        lines = [f"{self.mode or 'empty'}: used / pool / expected"]
        for r in self.rows:
            flag = "ok" if r.match else "DIFFERS"
            lines.append(f"  {r.kind:<10} {r.used:>3} / {r.pool:>3} / {r.expected:>3}  {flag}")
            if r.note:
                lines.append(f"    note: {r.note}")
        lines.extend(f"  {note}" for note in self.notes)
        return "\n".join(lines)


def account(netlist: Netlist, pool: Optional[CmPool] = None) -> ResourceReport:
    """Exact census by CM kind with the published count and a note for each deliberate difference"""
    sizes = pool.sizes if pool is not None else POOL_SIZES
    census = netlist.census()
    mode = ConfigMode.parse(netlist.mode) if netlist.mode else None
    expected = PUBLISHED_CENSUS.get(mode, {}) if mode else {}
    notes = CENSUS_NOTES.get(mode, {}) if mode else {}
    rows = []
    for kind in COUNTED_KINDS:
        k = kind.value
        used = census.get(k, 0)
        want = expected.get(k, 0)
        note = notes.get(k, "")
        if used != want and note:
            note = f"{used} used, {want} published: {note}"
        rows.append(ResourceRow(k, used, sizes.get(k, 0), want, note))
        if used != want:
            _logger.warning(f"account: {netlist.mode} uses {used} {k}, published {want}")
    return ResourceReport(netlist.mode, tuple(rows), tuple(netlist.notes))


def pool_summary(sizes: Optional[Dict[str, int]] = None) -> pd.DataFrame:
    """Per-mode census of the default configurations beside the pool totals"""
    sizes = dict(POOL_SIZES if sizes is None else sizes)
    columns = {}
    for mode in ConfigMode:
        columns[mode.value] = build_netlist(mode.value, default_spec(mode)).census()
    frame = pd.DataFrame(columns).fillna(0).astype(int)
    frame["max_mode"] = frame.max(axis=1)
    frame["pool"] = [sizes.get(k, 0) for k in frame.index]
    frame["note"] = [POOL_NOTES.get(k, "") for k in frame.index]
    return frame


def export_netlist(netlist: Netlist, path: Union[str, Path]) -> None:
    """Dump nodes, edges and census as YAML"""
    atomic_write(path, netlist.to_yaml())
    _logger.debug(f"export_netlist: wrote {netlist.name} to {path}")


def report_yaml(report: ResourceReport) -> str:
    return yaml.safe_dump(report.to_dict(), sort_keys=False)
