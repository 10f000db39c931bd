"""
Common Module netlists and a synchronous tick simulator.

A :class:`Netlist` is a set of named nodes. Counted CM kinds (adders, subtractors, multipliers,
LUTs, registers, multiplexers and the 1-bit counter) make up the resource census; wiring kinds
(ports, constants, scaling/rounding stages, splits and joins) are free. On every tick the
simulator evaluates the combinational nodes in topological order, reading registers and the
counter as sources, and then latches all state at once.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import yaml

from .errors import ArityMismatch
from .numerics import Tally

_logger = logging.getLogger(__name__)


class CmKind(Enum):
    ADDER = "adder"
    SUBTRACTOR = "subtractor"
    MULTIPLIER = "multiplier"
    LUT = "lut"
    REGISTER = "register"
    MUX2 = "mux2"
    MUX4 = "mux4"
    COUNTER1 = "counter1"
    INPUT = "input"
    OUTPUT = "output"
    CONST = "const"
    SCALE = "scale"
    SPLIT = "split"
    JOIN = "join"

    @property
    def counted(self) -> bool:
        return self in COUNTED_KINDS

    @property
    def stateful(self) -> bool:
        return self in (CmKind.REGISTER, CmKind.COUNTER1)


#: census order used by every report
COUNTED_KINDS = (
    CmKind.ADDER,
    CmKind.LUT,
    CmKind.SUBTRACTOR,
    CmKind.REGISTER,
    CmKind.MUX2,
    CmKind.MUX4,
    CmKind.MULTIPLIER,
    CmKind.COUNTER1,
)
SOURCE_KINDS = (CmKind.INPUT, CmKind.CONST, CmKind.COUNTER1)

Control = Dict[str, Any]
Values = Dict[str, Any]


@dataclass(frozen=True)
class Node:
    """One CM instance or wiring element

    Args:
        name (str): unique within the netlist
        kind (CmKind): what it is
        inputs (tuple of str): source node names, in operand order
        op (callable): ``op(ctl, *operands)`` for combinational nodes; ``ctl`` is the tick's control
            dict and carries the tick's :class:`Tally` under ``"tally"``
        weight (int): number of CMs the node stands for (a LUT bank holding several tables)
        value: reset value of a register or counter, idle value of an input, or a constant
        enable (callable, optional): ``enable(ctl, values)`` gates a register latch
        reset (callable, optional): ``reset(ctl, values)`` loads ``value`` instead of the input
        params (dict): plain data for export
    """

    name: str
    kind: CmKind
    inputs: Tuple[str, ...] = ()
    op: Optional[Callable[..., Any]] = field(default=None, repr=False, compare=False)
    weight: int = 1
    value: Any = 0
    enable: Optional[Callable[[Control, Values], bool]] = field(default=None, repr=False, compare=False)
    reset: Optional[Callable[[Control, Values], bool]] = field(default=None, repr=False, compare=False)
    params: Dict[str, Any] = field(default_factory=dict, compare=False)


def _no_control(tick: int) -> Control:
    return {}


def _always(ctl: Control, values: Values) -> bool:
    return True


def _identity(ctl: Control, value: Any) -> Any:
    return value


class Netlist:
    """Nodes, their connections, and the schedule that drives them

    Args:
        name (str): label used in logs and exports
        mode (str, optional): configuration mode the netlist realizes
        controller (callable, optional): maps a tick number to its control signals
        emit (callable, optional): ``emit(ctl, values)``, whether the output ports carry a result
        latency (int): results emitted before the first valid one (streaming)
        flush (int): idle ticks appended after a stream
        block_size (int, optional): inputs per block; ``None`` for one-sample streaming
        ticks_per_block (int): ticks spent on each block
    """

    def __init__(
        self,
        name: str,
        mode: Optional[str] = None,
        controller: Optional[Callable[[int], Control]] = None,
        emit: Optional[Callable[[Control, Values], bool]] = None,
        latency: int = 0,
        flush: int = 0,
        block_size: Optional[int] = None,
        ticks_per_block: int = 1,
    ) -> None:
        self.name = name
        self.mode = mode
        self.controller = controller or _no_control
        self.emit = emit or _always
        self.latency = latency
        self.flush = flush
        self.block_size = block_size
        self.ticks_per_block = ticks_per_block
        self.nodes: Dict[str, Node] = {}
        self.notes: List[str] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, name: str) -> bool:
        return name in self.nodes

    def __getitem__(self, name: str) -> Node:
        return self.nodes[name]

    def add(self, name: str, kind: CmKind, inputs: Sequence[str] = (), op=None, **kwargs) -> str:
        if name in self.nodes:
            raise ValueError(f"Netlist.add: duplicate node {name!r} in {self.name}")
        self.nodes[name] = Node(name, kind, tuple(inputs), op, **kwargs)
        return name

    def input(self, name: str, idle: Any = 0) -> str:
        return self.add(name, CmKind.INPUT, value=idle)

    def output(self, name: str, source: str) -> str:
        return self.add(name, CmKind.OUTPUT, (source,), _identity)

    def const(self, name: str, value: Any, **params) -> str:
        return self.add(name, CmKind.CONST, value=value, params=params)

    def register(self, name: str, d: str, value: Any = 0, enable=None, reset=None) -> str:
        return self.add(name, CmKind.REGISTER, (d,), value=value, enable=enable, reset=reset)

    @property
    def input_ports(self) -> List[str]:
        return [n.name for n in self.nodes.values() if n.kind is CmKind.INPUT]

    @property
    def output_ports(self) -> List[str]:
        return [n.name for n in self.nodes.values() if n.kind is CmKind.OUTPUT]

    def census(self) -> Dict[str, int]:
        """CM count per counted kind, LUT banks weighted by the tables they hold"""
        counts: Counter = Counter()
        for node in self.nodes.values():
            if node.kind.counted:
                counts[node.kind.value] += node.weight
        return {kind.value: counts[kind.value] for kind in COUNTED_KINDS}

    def edges(self) -> List[Tuple[str, str]]:
        return [(src, node.name) for node in self.nodes.values() for src in node.inputs]

    def topological_order(self) -> List[str]:
        """State nodes first, then combinational nodes so that operands precede their users

        Raises:
            ValueError: on a combinational loop or a dangling input
        """
        pending: Dict[str, int] = {}
        users: Dict[str, List[str]] = {name: [] for name in self.nodes}
        for node in self.nodes.values():
            for src in node.inputs:
                if src not in self.nodes:
                    raise ValueError(f"Netlist.topological_order: {node.name} reads unknown node {src!r}")
            if node.kind.stateful:
                pending[node.name] = 0
                continue
            pending[node.name] = len(node.inputs)
            for src in node.inputs:
                users[src].append(node.name)
        ready = deque(name for name, count in pending.items() if count == 0)
        order = []
        while ready:
            name = ready.popleft()
            order.append(name)
            for user in users[name]:
                pending[user] -= 1
                if pending[user] == 0:
                    ready.append(user)
        if len(order) != len(self.nodes):
            stuck = sorted(set(self.nodes) - set(order))
            raise ValueError(f"Netlist.topological_order: combinational loop through {stuck[:5]}")
        return order

    def validate(self) -> None:
        """Acyclic outside the state nodes and every node driven from a port, constant or counter"""
        self.topological_order()
        seen = set()
        frontier = deque(n.name for n in self.nodes.values() if n.kind in SOURCE_KINDS)
        users: Dict[str, List[str]] = {name: [] for name in self.nodes}
        for src, dst in self.edges():
            users[src].append(dst)
        while frontier:
            name = frontier.popleft()
            if name in seen:
                continue
            seen.add(name)
            frontier.extend(users[name])
        orphans = sorted(set(self.nodes) - seen)
        if orphans:
            raise ValueError(f"Netlist.validate: {self.name} has undriven nodes {orphans[:5]}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "mode": self.mode,
            "latency": self.latency,
            "flush": self.flush,
            "block_size": self.block_size,
            "ticks_per_block": self.ticks_per_block,
            "census": self.census(),
            "io": {"inputs": self.input_ports, "outputs": self.output_ports},
            "nodes": [
                {"name": n.name, "kind": n.kind.value, "inputs": list(n.inputs), "weight": n.weight, **n.params}
                for n in self.nodes.values()
            ],
            "edges": [list(e) for e in self.edges()],
            "notes": list(self.notes),
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


class Simulator:
    """Tick-by-tick evaluation of one netlist

    Events counted during a tick reach the tally only when the tick is active: the controller may
    flag it under ``"active"``, otherwise a tick is active when it emits a result.
    """

    def __init__(self, netlist: Netlist, tally: Optional[Tally] = None) -> None:
        self.netlist = netlist
        self.tally = tally
        self.order = netlist.topological_order()
        self.state: Values = {n.name: n.value for n in netlist.nodes.values() if n.kind.stateful}
        self.tick = 0

    def step(self, inputs: Values, extra: Optional[Control] = None) -> Tuple[bool, Values]:
        net = self.netlist
        ctl = dict(net.controller(self.tick))
        ctl.update(extra or {})
        ctl["tick"] = self.tick
        scratch = Tally()
        ctl["tally"] = scratch

        values: Values = {}
        for name in self.order:
            node = net.nodes[name]
            if node.kind.stateful:
                values[name] = self.state[name]
            elif node.kind is CmKind.INPUT:
                values[name] = inputs.get(name, node.value)
            elif node.kind is CmKind.CONST:
                values[name] = node.value
            else:
                values[name] = node.op(ctl, *(values[src] for src in node.inputs))

        emitted = net.emit(ctl, values)
        latched = {}
        for name in self.state:
            node = net.nodes[name]
            if node.reset is not None and node.reset(ctl, values):
                latched[name] = node.value
            elif node.enable is None or node.enable(ctl, values):
                latched[name] = self.state[name] ^ 1 if node.kind is CmKind.COUNTER1 else values[node.inputs[0]]
        self.state.update(latched)
        self.tick += 1

        if ctl.get("active", emitted) and self.tally is not None:
            for kind, n in scratch.counts.items():
                self.tally.count(kind, n)
        return emitted, {port: values[port] for port in net.output_ports}

    def run_stream(self, samples: Sequence[Any]) -> List[Any]:
        """One sample per tick, ``flush`` idle ticks after, the first ``latency`` results dropped"""
        ports, outs = self.netlist.input_ports, self.netlist.output_ports
        if len(ports) != 1 or len(outs) != 1:
            raise ArityMismatch(f"Simulator.run_stream: {self.netlist.name} is not a one-port stream netlist")
        port, out = ports[0], outs[0]
        results = []
        for t in range(len(samples) + self.netlist.flush):
            valid = t < len(samples)
            emitted, values = self.step({port: samples[t]} if valid else {}, {"valid": valid})
            if emitted:
                results.append(values[out])
        return results[self.netlist.latency :]

    def run_blocks(self, samples: Sequence[Any]) -> List[Any]:
        """Present each block on the input ports for ``ticks_per_block`` ticks"""
        ports, outs = self.netlist.input_ports, self.netlist.output_ports
        size = self.netlist.block_size
        if size is None or len(ports) != size:
            raise ArityMismatch(f"Simulator.run_blocks: {self.netlist.name} is not a block netlist")
        if len(samples) % size:
            raise ArityMismatch(
                f"Simulator.run_blocks: {len(samples)} samples is not a whole number of {size}-sample blocks"
            )
        results = []
        for start in range(0, len(samples), size):
            block = dict(zip(ports, samples[start : start + size]))
            for _ in range(self.netlist.ticks_per_block):
                emitted, values = self.step(block, {"valid": True})
                if emitted:
                    results.extend(values[o] for o in outs)
        return results

    def run(self, samples: Sequence[Any]) -> List[Any]:
        if self.netlist.block_size is None:
            return self.run_stream(samples)
        return self.run_blocks(samples)
