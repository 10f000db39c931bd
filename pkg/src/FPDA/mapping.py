"""
Per-mode netlist construction.

Each builder wires pool CMs into the datapath of one configuration mode and sets the schedule
(controller, emit gate, latency) the simulator needs to reproduce the behavioural kernel
bit for bit:

* FIR: input-select mux, sample registers, two tables and a combine adder per tap, adder tree.
* IIR: a forward FIR on the input and a feedback FIR on past outputs, joined by one adder; the
  Q1.7 feedback register chain is fed through output scaling, like the Q1.15 output.
* DWT: one decimator, polyphase over the 1-bit counter.
* FFT: 8 butterflies re-used over 4 stages, operands routed by mux4, twiddles by mux2.
* DCT: two butterfly levels and 24 bit-plane DA row tables.
"""

import logging
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .cosine import (
    DCT_INPUT,
    DCT_OUTPUT,
    DCT_SIZE,
    EVEN_EVEN_ROWS,
    EVEN_ODD_ROWS,
    NORM_SHIFT,
    ODD_ROWS,
    DctConstants,
    DctDecomposition,
    derive_decomposition,
)
from .da_engine import NIBBLE, CoefficientUnit, DaLut, build_units, dot_census
from .filter_bank import FEEDBACK_FORMAT, FirSpec, IirSpec
from .fourier import FFT_INPUT, FftPlan, TwiddleEntry, bit_reverse, stage_pairs
from .netlist import CmKind, Netlist
from .numerics import (
    Q1_7,
    Q1_15,
    ComplexFixed,
    FixedPoint,
    QFormat,
    WideAccumulator,
    fx_mul,
    renormalize,
)
from .wavelet import DWT_OUTPUT, DilationPair

_logger = logging.getLogger(__name__)

PRODUCT_BITS = Q1_15.fraction_bits + Q1_7.fraction_bits

FFT_TICKS = 6
#: twiddle index used by butterfly b at stages 0..3
BUTTERFLY_TWIDDLES: Tuple[Tuple[int, int, int, int], ...] = (
    (0, 0, 0, 0),
    (0, 0, 2, 1),
    (0, 4, 2, 2),
    (0, 0, 6, 3),
    (0, 4, 6, 4),
    (0, 0, 4, 5),
    (0, 4, 4, 6),
    (0, 4, 0, 7),
)

#: two's-complement width of the DCT second-level words
DCT_WORD_BITS = 18
DCT_TICKS = 1 + DCT_WORD_BITS


# --- operations carried by the nodes -------------------------------------------------------------


def _select(selector, ctl, *operands):
    return operands[selector(ctl)]


def _valid(ctl) -> int:
    return 1 if ctl.get("valid") else 0


def _nibble_lookup(table: DaLut, high: bool, ctl, sample: FixedPoint) -> int:
    word = sample.raw & 0xFF
    return table[word >> NIBBLE] if high else table[word & 0xF]


def _bank_lookup(tables: Tuple[DaLut, DaLut], high: bool, ctl, sample: FixedPoint, phase: int) -> int:
    return _nibble_lookup(tables[phase], high, ctl, sample)


def _combine(ctl, low: int, high: int) -> WideAccumulator:
    return WideAccumulator(low + (high << NIBBLE), PRODUCT_BITS)


def _add(ctl, a, b):
    return a + b


def _sub(ctl, a, b):
    return a - b


def _round(format: QFormat, ctl, acc: WideAccumulator) -> FixedPoint:
    return renormalize(acc, format, ctl["tally"])


# --- DA dot product ------------------------------------------------------------------------------


def _da_dot_nodes(net: Netlist, prefix: str, units: Sequence[CoefficientUnit], sources: Sequence[str]) -> str:
    """Tables, combine adders and a balanced adder tree; returns the root node"""
    leaves = []
    for k, (unit, src) in enumerate(zip(units, sources)):
        low = net.add(
            f"{prefix}_lut{k}_lo",
            CmKind.LUT,
            (src,),
            partial(_nibble_lookup, unit.low, False),
            params={"coefficient": unit.coefficient.raw, "role": unit.low.role.value},
        )
        high = net.add(
            f"{prefix}_lut{k}_hi",
            CmKind.LUT,
            (src,),
            partial(_nibble_lookup, unit.high, True),
            params={"coefficient": unit.coefficient.raw, "role": unit.high.role.value},
        )
        leaves.append(net.add(f"{prefix}_comb{k}", CmKind.ADDER, (low, high), _combine))
    return _adder_tree_nodes(net, f"{prefix}_tree", leaves)


def _adder_tree_nodes(net: Netlist, prefix: str, leaves: List[str]) -> str:
    if len(leaves) == 1:
        return leaves[0]
    mid = (len(leaves) + 1) // 2
    left = _adder_tree_nodes(net, prefix + "l", leaves[:mid])
    right = _adder_tree_nodes(net, prefix + "r", leaves[mid:])
    return net.add(prefix, CmKind.ADDER, (left, right), _add)


def _shift_chain(net: Netlist, prefix: str, first: str, length: int, value: Any) -> List[str]:
    regs = []
    source = first
    for k in range(length):
        source = net.register(f"{prefix}{k}", source, value)
        regs.append(source)
    return regs


# --- FIR / IIR -----------------------------------------------------------------------------------


def build_fir(spec: FirSpec) -> Netlist:
    net = Netlist("fir", "FIR", latency=1, flush=1)
    zero = FixedPoint.zero(Q1_7)
    x = net.input("x", zero)
    idle = net.const("zero", zero)
    sel = net.add("x_sel", CmKind.MUX2, (idle, x), partial(_select, _valid))
    regs = _shift_chain(net, "r", sel, spec.length, zero)
    root = _da_dot_nodes(net, "fir", spec.units, regs)
    net.output("y", net.add("y_round", CmKind.SCALE, (root,), partial(_round, spec.output_format)))
    _logger.debug(f"build_fir: {spec.length} taps, {len(net)} nodes")
    return net


def build_iir(spec: IirSpec) -> Netlist:
    net = Netlist("iir", "IIR", latency=1, flush=1)
    zero = FixedPoint.zero(Q1_7)
    x = net.input("x", zero)
    idle = net.const("zero", zero)
    sel = net.add("x_sel", CmKind.MUX2, (idle, x), partial(_select, _valid))
    regs = _shift_chain(net, "r", sel, spec.length, zero)
    total = _da_dot_nodes(net, "fwd", spec.forward.units, regs)

    if spec.feedback_units:
        # the feedback chain is closed through f0 below
        f0 = "f0"
        feedback_regs = [f0] + [f"f{k}" for k in range(1, len(spec.feedback_units))]
        fb_root = _da_dot_nodes(net, "fb", spec.feedback_units, feedback_regs)
        total = net.add("join", CmKind.ADDER, (total, fb_root), _add)
        fed = net.add("fb_round", CmKind.SCALE, (total,), partial(_round, FEEDBACK_FORMAT))
        net.register(f0, fed, zero)
        for k in range(1, len(spec.feedback_units)):
            net.register(f"f{k}", f"f{k - 1}", zero)

    net.output("y", net.add("y_round", CmKind.SCALE, (total,), partial(_round, spec.output_format)))
    net.notes.append("one join adder for the two FIR paths; both roundings are output scaling like y_round")
    _logger.debug(f"build_iir: {spec.length} taps, {len(net)} nodes")
    return net


# --- DWT decimator -------------------------------------------------------------------------------


def _phase_is(value: int, ctl, values) -> bool:
    return values["phase"] == value


def build_dwt(pair: DilationPair, branch: str = "lowpass") -> Netlist:
    """Polyphase decimator

    The counter alternates 0, 1, 0, ... When it reads 1 the odd-coefficient terms are summed into
    the parallel-load register; when it reads 0 the even-coefficient terms are added to it and the
    result is released. Each bank at an even delay position holds the tables of one (even, odd)
    coefficient pair and the counter picks between them.
    """
    if branch not in ("lowpass", "highpass"):
        raise ValueError(f"build_dwt: branch must be lowpass or highpass, got {branch!r}")
    taps = pair.l0 if branch == "lowpass" else pair.h0
    units = build_units(taps)
    net = Netlist(f"dwt_{branch}", "DWT", emit=partial(_phase_is, 0), latency=1, flush=1)
    zero = FixedPoint.zero(Q1_7)
    x = net.input("x", zero)
    regs = _shift_chain(net, "r", x, len(taps) - 1, zero)
    phase = net.add("phase", CmKind.COUNTER1, value=0)

    leaves = []
    for p in range(0, len(taps), 2):
        pair_units = (units[p], units[p + 1])
        banks = []
        for high in (False, True):
            tables = tuple(u.high if high else u.low for u in pair_units)
            banks.append(
                net.add(
                    f"bank{p}_{'hi' if high else 'lo'}",
                    CmKind.LUT,
                    (regs[p], phase),
                    partial(_bank_lookup, tables, high),
                    weight=2,
                    params={"coefficients": [u.coefficient.raw for u in pair_units]},
                )
            )
        leaves.append(net.add(f"comb{p}", CmKind.ADDER, tuple(banks), _combine))
    tree = _adder_tree_nodes(net, "tree", leaves)
    held = net.register("partial", tree, WideAccumulator(0, PRODUCT_BITS), enable=partial(_phase_is, 1))
    acc = net.add("accumulate", CmKind.ADDER, (tree, held), _add)
    net.output("y", net.add("y_round", CmKind.SCALE, (acc,), partial(_round, DWT_OUTPUT)))
    net.notes.append("each bank holds two tables (an even and an odd coefficient) addressed by the counter")
    return net


# --- FFT -----------------------------------------------------------------------------------------


def fft_assignment(n: int = 16) -> List[List[Tuple[int, int]]]:
    """``assignment[stage][b]`` is the (top, bottom) register pair butterfly b serves at that stage"""
    out = []
    for stage, _ in enumerate(BUTTERFLY_TWIDDLES[0]):
        free = {}
        for top, bottom, k in stage_pairs(stage, n):
            free.setdefault(k, []).append((top, bottom))
        row = []
        for twiddles in BUTTERFLY_TWIDDLES:
            k = twiddles[stage]
            if not free.get(k):
                raise ValueError(f"fft_assignment: no pair with twiddle {k} left at stage {stage}")
            row.append(free[k].pop(0))
        out.append(row)
    return out


def _fft_control(tick: int) -> Dict[str, Any]:
    t = tick % FFT_TICKS
    stage = t - 1 if 1 <= t <= 4 else None
    return {"load": t == 0, "stage": stage, "active": stage is not None or t == FFT_TICKS - 1}


def _fft_emit(ctl, values) -> bool:
    return ctl["tick"] % FFT_TICKS == FFT_TICKS - 1


def _stage_index(ctl) -> int:
    return ctl["stage"] or 0


def _twiddle_pick(stages: Tuple[int, ...], k: int, ctl) -> int:
    stage = ctl["stage"]
    return 1 if stage is not None and stages[stage] == k else 0


def _on_load(ctl, values) -> bool:
    return bool(ctl.get("load"))


def _on_stage(last_only: bool, ctl, values) -> bool:
    stage = ctl.get("stage")
    return stage is not None and (stage == 3 or not last_only)


def _reformat(format: QFormat, ctl, z: ComplexFixed) -> ComplexFixed:
    tally = ctl["tally"]
    return ComplexFixed(
        renormalize(WideAccumulator.of(z.re), format, tally),
        renormalize(WideAccumulator.of(z.im), format, tally),
    )


def _re_minus_im(ctl, v: ComplexFixed) -> FixedPoint:
    fmt = v.format
    return FixedPoint(v.re.raw - v.im.raw, QFormat(fmt.integer_bits + 1, fmt.fraction_bits))


def _mul_c_minus_s(ctl, w: TwiddleEntry, v: ComplexFixed) -> WideAccumulator:
    return fx_mul(w.c_minus_s, v.im, ctl["tally"])


def _mul_c(ctl, w: TwiddleEntry, diff: FixedPoint) -> WideAccumulator:
    return fx_mul(w.c, diff, ctl["tally"])


def _mul_c_plus_s(ctl, w: TwiddleEntry, v: ComplexFixed) -> WideAccumulator:
    return fx_mul(w.c_plus_s, v.re, ctl["tally"])


def _complex_add(ctl, top: ComplexFixed, re: WideAccumulator, im: WideAccumulator):
    return WideAccumulator.of(top.re) + re, WideAccumulator.of(top.im) + im


def _complex_sub(ctl, top: ComplexFixed, re: WideAccumulator, im: WideAccumulator):
    return WideAccumulator.of(top.re) - re, WideAccumulator.of(top.im) - im


def _butterfly_round(format: QFormat, halve: int, ctl, wide) -> ComplexFixed:
    tally = ctl["tally"]
    re, im = wide
    return ComplexFixed(
        renormalize(WideAccumulator(re.raw, re.fraction_bits + halve), format, tally),
        renormalize(WideAccumulator(im.raw, im.fraction_bits + halve), format, tally),
    )


def build_fft(plan: FftPlan) -> Netlist:
    """16 input-buffer, 16 working and 16 output registers around 8 re-used butterflies

    Tick 0 loads the bit-reversed input, ticks 1..4 run the stages, tick 5 presents the bins.
    Butterfly b always writes working registers 2b and 2b + 1.
    """
    net = Netlist(
        "fft16", "FFT", controller=_fft_control, emit=_fft_emit, block_size=plan.n, ticks_per_block=FFT_TICKS
    )
    work = plan.work_format
    ports = [net.input(f"x{i}", ComplexFixed.zero(FFT_INPUT)) for i in range(plan.n)]
    buffer = []
    for j in range(plan.n):
        loaded = net.add(f"in{j}_fmt", CmKind.SCALE, (ports[bit_reverse(j, plan.stages)],), partial(_reformat, work))
        buffer.append(net.register(f"in{j}", loaded, ComplexFixed.zero(work), enable=_on_load))

    assignment = fft_assignment(plan.n)
    # where logical position i sits after each stage
    location = [{} for _ in range(plan.stages)]
    for stage, row in enumerate(assignment):
        for b, (top, bottom) in enumerate(row):
            location[stage][top] = 2 * b
            location[stage][bottom] = 2 * b + 1

    working = [f"w{r}" for r in range(plan.n)]
    halve = 1 if plan.scale_stages else 0
    results = {}
    for b, twiddles in enumerate(BUTTERFLY_TWIDDLES):
        operands = []
        for side in (0, 1):
            sources = [buffer[assignment[0][b][side]]]
            for stage in range(1, plan.stages):
                sources.append(working[location[stage - 1][assignment[stage][b][side]]])
            name = f"b{b}_{'top' if side == 0 else 'bot'}_mux"
            operands.append(net.add(name, CmKind.MUX4, sources, partial(_select, _stage_index)))
        top, bottom = operands

        distinct = list(dict.fromkeys(twiddles))
        consts = {}
        for k in distinct:
            entry = plan.twiddles[k]
            consts[k] = net.const(
                f"b{b}_w{k}", entry, c_minus_s=entry.c_minus_s.raw, c_plus_s=entry.c_plus_s.raw, c=entry.c.raw
            )
        tw = consts[distinct[0]]
        for i, k in enumerate(distinct[1:], start=1):
            pick = partial(_select, partial(_twiddle_pick, twiddles, k))
            tw = net.add(f"b{b}_tw_mux{i}", CmKind.MUX2, (tw, consts[k]), pick)

        diff = net.add(f"b{b}_diff", CmKind.SUBTRACTOR, (bottom,), _re_minus_im)
        m1 = net.add(f"b{b}_m1", CmKind.MULTIPLIER, (tw, bottom), _mul_c_minus_s)
        m2 = net.add(f"b{b}_m2", CmKind.MULTIPLIER, (tw, diff), _mul_c)
        m3 = net.add(f"b{b}_m3", CmKind.MULTIPLIER, (tw, bottom), _mul_c_plus_s)
        re = net.add(f"b{b}_re", CmKind.ADDER, (m1, m2), _add)
        im = net.add(f"b{b}_im", CmKind.SUBTRACTOR, (m3, m2), _sub)
        upper = net.add(f"b{b}_upper", CmKind.ADDER, (top, re, im), _complex_add)
        lower = net.add(f"b{b}_lower", CmKind.SUBTRACTOR, (top, re, im), _complex_sub)
        results[2 * b] = net.add(f"b{b}_upper_fmt", CmKind.SCALE, (upper,), partial(_butterfly_round, work, halve))
        results[2 * b + 1] = net.add(f"b{b}_lower_fmt", CmKind.SCALE, (lower,), partial(_butterfly_round, work, halve))

    for r in range(plan.n):
        net.register(working[r], results[r], ComplexFixed.zero(work), enable=partial(_on_stage, False))
    last = location[plan.stages - 1]
    for i in range(plan.n):
        out_fmt = net.add(f"out{i}_fmt", CmKind.SCALE, (results[last[i]],), partial(_reformat, plan.output_format))
        reg = net.register(
            f"out{i}", out_fmt, ComplexFixed.zero(plan.output_format), enable=partial(_on_stage, True)
        )
        net.output(f"X{i}", reg)
    net.notes.append("twiddles come from a constant table; scaling stages are wiring")
    return net


# --- DCT -----------------------------------------------------------------------------------------


def _dct_control(tick: int) -> Dict[str, Any]:
    t = tick % DCT_TICKS
    return {"load": t == 0, "plane": t - 1 if t >= 1 else None, "points": DCT_SIZE}


def _dct_emit(ctl, values) -> bool:
    return ctl["tick"] % DCT_TICKS == DCT_TICKS - 1


def _raw_sum(ctl, a: FixedPoint, b: FixedPoint) -> int:
    return a.raw + b.raw


def _raw_diff(ctl, a: FixedPoint, b: FixedPoint) -> int:
    return a.raw - b.raw


def _scalable_pick(ctl) -> int:
    return 0 if ctl.get("points", DCT_SIZE) == DCT_SIZE else 1


def _pass_raw(selector, ctl, folded: int, raw_input: FixedPoint) -> int:
    return folded if selector(ctl) == 0 else raw_input.raw


def _plane_lookup(table: Tuple[int, ...], ctl, *words: int) -> int:
    plane = ctl.get("plane")
    if plane is None:
        return 0
    address = 0
    for j, w in enumerate(words):
        address |= ((w >> plane) & 1) << j
    return table[address]


def _plane_accumulate(ctl, acc: int, term: int) -> int:
    plane = ctl.get("plane")
    return acc if plane is None else acc + (term << plane)


def _sign_correct(ctl, acc: int, term: int) -> int:
    return acc - (term << DCT_WORD_BITS)


def _dct_round(ctl, row: int) -> FixedPoint:
    frac = DCT_INPUT.fraction_bits + Q1_15.fraction_bits + NORM_SHIFT
    return renormalize(WideAccumulator(row, frac), DCT_OUTPUT, ctl["tally"])


def plane_table(coefficient_raws: Sequence[int]) -> Tuple[int, ...]:
    """16-entry table ``T[a] = sum_j c_j * bit_j(a)``"""
    size = 1 << len(coefficient_raws)
    return tuple(sum(c for j, c in enumerate(coefficient_raws) if a >> j & 1) for a in range(size))


def dct_entry_census() -> Dict[str, int]:
    """CMs a single-tick DCT would need with one coefficient unit per matrix entry

    Every output row of each 4-column block becomes a 4-unit DA dot product. The totals overrun
    the pool's LUTs and adders, which is why :func:`build_dct` shares one table per row over the
    bit planes instead.
    """
    half = DCT_SIZE // 2
    rows = len(EVEN_EVEN_ROWS) + len(EVEN_ODD_ROWS) + 2 * len(ODD_ROWS)
    dot = dot_census(4)
    butterflies = half + half // 2
    return {
        "lut": rows * dot.luts,
        "adder": rows * dot.adders + len(ODD_ROWS) + butterflies,
        "subtractor": butterflies,
    }


def build_dct(decomposition: Optional[DctDecomposition] = None, constants: Optional[DctConstants] = None) -> Netlist:
    """Butterflies, then one bit-plane DA table per output row of each block

    Tick 0 latches the folded sums; ticks 1..18 walk the 18 bit planes of the second-level words,
    LSB first, with the sign plane subtracted on the last tick, when the 16 rows are released.
    """
    decomposition = decomposition or derive_decomposition()
    constants = constants or DctConstants.build()
    net = Netlist(
        "dct16", "DCT", controller=_dct_control, emit=_dct_emit, block_size=DCT_SIZE, ticks_per_block=DCT_TICKS
    )
    half = DCT_SIZE // 2
    x = [net.input(f"x{i}", FixedPoint.zero(DCT_INPUT)) for i in range(DCT_SIZE)]
    s, d = [], []
    for i in range(half):
        s.append(net.add(f"s{i}", CmKind.ADDER, (x[i], x[DCT_SIZE - 1 - i]), _raw_sum))
        d.append(net.add(f"d{i}", CmKind.SUBTRACTOR, (x[i], x[DCT_SIZE - 1 - i]), _raw_diff))
    latched = []
    for i in range(half):
        pick = net.add(f"s{i}_mux", CmKind.MUX2, (s[i], x[i]), partial(_pass_raw, _scalable_pick))
        latched.append(net.register(f"s{i}_reg", pick, 0, enable=_on_load))
    ss, sd = [], []
    for i in range(half // 2):
        ss.append(net.add(f"ss{i}", CmKind.ADDER, (latched[i], latched[half - 1 - i]), _add))
        sd.append(net.add(f"sd{i}", CmKind.SUBTRACTOR, (latched[i], latched[half - 1 - i]), _sub))

    words = {"even_even": ss, "even_odd": sd, "odd_left": d[:4], "odd_right": d[4:]}
    rows_of = {"even_even": EVEN_EVEN_ROWS, "even_odd": EVEN_ODD_ROWS, "odd_left": ODD_ROWS, "odd_right": ODD_ROWS}
    row_out: Dict[str, Dict[int, str]] = {}
    for block, sources in words.items():
        row_out[block] = {}
        for r, (k, symbols) in enumerate(zip(rows_of[block], decomposition.block(block))):
            raws = [constants.signed(sym).raw for sym in symbols]
            prefix = f"{block}{r}"
            lut = net.add(
                f"{prefix}_lut",
                CmKind.LUT,
                tuple(sources),
                partial(_plane_lookup, plane_table(raws)),
                params={"symbols": list(symbols)},
            )
            acc = f"{prefix}_acc"
            step = net.add(f"{prefix}_add", CmKind.ADDER, (acc, lut), _plane_accumulate)
            net.register(acc, step, 0, reset=_on_load)
            row_out[block][k] = net.add(f"{prefix}_sign", CmKind.SUBTRACTOR, (step, lut), _sign_correct)

    for k in range(DCT_SIZE):
        if k in row_out["even_even"]:
            total = row_out["even_even"][k]
        elif k in row_out["even_odd"]:
            total = row_out["even_odd"][k]
        else:
            total = net.add(f"odd{k}_join", CmKind.ADDER, (row_out["odd_left"][k], row_out["odd_right"][k]), _add)
        net.output(f"Y{k}", net.add(f"Y{k}_round", CmKind.SCALE, (total,), _dct_round))
    net.notes.append("the 8 input muxes select the 8-point scalable path; fixed to 16 points here")
    entries = dct_entry_census()
    net.notes.append(
        f"one unit per matrix entry would take {entries['lut']} lut and {entries['adder']} adder, "
        "so each row shares one table over the bit planes"
    )
    return net


def build_netlist(mode: str, spec: Any, branch: str = "lowpass") -> Netlist:
    """Dispatch on the configuration mode name"""
    builders = {
        "FIR": build_fir,
        "IIR": build_iir,
        "FFT": build_fft,
        "DCT": build_dct,
    }
    if mode == "DWT":
        return build_dwt(spec, branch)
    if mode not in builders:
        raise ValueError(f"build_netlist: unknown mode {mode!r}")
    return builders[mode](spec)
