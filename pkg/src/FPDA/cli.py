"""
Command-line front end for the array.

    fpda modes
    fpda run --mode FIR --in impulse.txt --coeffs taps.txt --out y.txt --verify
    fpda resources --mode FFT
    fpda verify-all --trials 100 --seed 1

Exit codes: 0 success, 2 bad input (files, descriptor, arguments), 3 the pool ran out of a CM
type, 4 a verification failed.
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml

from . import __version__
from .cosine import DCT_INPUT, DCT_OUTPUT, DCT_SIZE, dct2d, dct16, derive_decomposition
from .descriptor import SAMPLE_FORMATS, RunDescriptor, default_sample_format
from .errors import ArityMismatch, FpdaError, PoolExhausted, SampleFileError
from .fabric import (
    CONTROL_WORDS,
    CmPool,
    ConfigMode,
    ResourceReport,
    account,
    configure,
    decode,
    default_spec,
    execute,
    pool_summary,
    release,
)
from .filter_bank import FEEDBACK_FORMAT, MAX_TAPS, FirSpec, IirSpec, fir_filter, iir_filter, read_coefficients
from .fourier import FFT_INPUT, FFT_SIZE, FftPlan, fft16
from .numerics import Q1_7, Q1_15, ComplexFixed, FixedPoint, Tally, from_raws, quantize
from .oracle import (
    TOLERANCES,
    ToleranceSpec,
    complex_lsb_errors,
    conv_direct,
    dct2d_direct,
    dct_direct,
    dft_direct,
    dwt_direct,
    iir_direct,
    lsb_errors,
    relative_energy_error,
)
from .sampleio import atomic_write, read_block, read_complex, read_real, write_samples
from .wavelet import DWT_OUTPUT, DilationPair, decimate

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_POOL = 3
EXIT_VERIFY = 4

INPUT_FORMATS = {
    ConfigMode.FIR: Q1_7,
    ConfigMode.IIR: Q1_7,
    ConfigMode.DWT: Q1_7,
    ConfigMode.FFT: FFT_INPUT,
    ConfigMode.DCT: DCT_INPUT,
}
GENERATED_LENGTH = {
    ConfigMode.FIR: 256,
    ConfigMode.IIR: 256,
    ConfigMode.DWT: 64,
    ConfigMode.FFT: 4 * FFT_SIZE,
    ConfigMode.DCT: 4 * DCT_SIZE,
}


# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----
# Streams, parameters and the two evaluation paths
# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----


def generate_stream(mode: ConfigMode, rng: np.random.Generator, length: Optional[int] = None) -> List[Any]:
    """Random samples in the mode's input format

    FFT inputs are kept within +-0.5 and DCT inputs within +-1.0 so the outputs stay in range.
    """
    length = GENERATED_LENGTH[mode] if length is None else length
    if mode is ConfigMode.FFT:
        re = rng.integers(-4096, 4096, length)
        im = rng.integers(-4096, 4096, length)
        return [ComplexFixed(FixedPoint(int(a), FFT_INPUT), FixedPoint(int(b), FFT_INPUT)) for a, b in zip(re, im)]
    if mode is ConfigMode.DCT:
        return from_raws(rng.integers(-8192, 8192, length), DCT_INPUT)
    return from_raws(rng.integers(Q1_7.min_raw, Q1_7.max_raw + 1, length), Q1_7)


def random_spec(mode: ConfigMode, rng: np.random.Generator, scale_stages: bool = False) -> Any:
    """Random FIR taps, a stable random IIR (sum|b| = 0.5) or the fixed parameters of the other modes"""
    if mode is ConfigMode.FIR:
        return FirSpec.from_floats(rng.uniform(-0.06, 0.06, MAX_TAPS))
    if mode is ConfigMode.IIR:
        b = rng.uniform(-1.0, 1.0, MAX_TAPS - 1)
        b *= 0.5 / np.sum(np.abs(b))
        return IirSpec.from_floats(rng.uniform(-0.03, 0.03, MAX_TAPS), b)
    if mode is ConfigMode.FFT:
        return FftPlan(scale_stages=scale_stages)
    return default_spec(mode)


def _blocks(samples: Sequence[Any], size: int) -> List[Sequence[Any]]:
    if len(samples) % size:
        raise ArityMismatch(f"_blocks: {len(samples)} samples is not a whole number of {size}-sample blocks")
    return [samples[i : i + size] for i in range(0, len(samples), size)]


def behavioural(
    mode: ConfigMode, spec: Any, samples: Sequence[Any], branch: str = "lowpass", tally: Optional[Tally] = None
) -> List[Any]:
    """Run the kernel functions directly, without a netlist"""
    if mode is ConfigMode.FIR:
        return fir_filter(spec, samples, tally)
    if mode is ConfigMode.IIR:
        return iir_filter(spec, samples, tally)
    if mode is ConfigMode.DWT:
        return decimate(spec.lowpass if branch == "lowpass" else spec.highpass, samples, tally)
    if mode is ConfigMode.FFT:
        return [z for block in _blocks(samples, FFT_SIZE) for z in fft16(spec, block, tally)]
    return [y for block in _blocks(samples, DCT_SIZE) for y in dct16(block, tally)]


def reference_errors(
    mode: ConfigMode, spec: Any, samples: Sequence[Any], outputs: Sequence[Any], branch: str = "lowpass"
) -> Tuple[np.ndarray, ToleranceSpec, float]:
    """LSB errors of ``outputs`` against the reference, the mode's tolerance, and the relative energy error"""
    energy = 0.0
    if mode is ConfigMode.FIR:
        x = [s.value for s in samples]
        ref = conv_direct([t.value for t in spec.taps], x)[: len(x)]
        errors = lsb_errors(outputs, ref)
    elif mode is ConfigMode.IIR:
        x = [s.value for s in samples]
        a = [t.value for t in spec.forward.taps]
        b = [t.value for t in spec.feedback]
        errors = lsb_errors(outputs, iir_direct(a, b, x, FEEDBACK_FORMAT))
    elif mode is ConfigMode.DWT:
        x = [s.value for s in samples]
        low, high = dwt_direct([t.value for t in spec.h0], [t.value for t in spec.l0], x, 1, DWT_OUTPUT)[0]
        errors = lsb_errors(outputs, low if branch == "lowpass" else high)
    elif mode is ConfigMode.FFT:
        ref = np.concatenate([dft_direct([z.value for z in block]) for block in _blocks(samples, FFT_SIZE)])
        if spec.scale_stages:
            ref = ref / (1 << spec.stages)
        errors = complex_lsb_errors(outputs, ref, spec.output_format)
        energy = relative_energy_error([z.value for z in outputs], ref)
    else:
        ref = np.concatenate([dct_direct([s.value for s in block]) for block in _blocks(samples, DCT_SIZE)])
        errors = lsb_errors(outputs, ref, DCT_OUTPUT)
    return errors, TOLERANCES[mode.value], energy


def _same(a: Sequence[Any], b: Sequence[Any]) -> bool:
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----
# run
# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----


@dataclass
class RunSettings:
    """Descriptor values overridden by command-line flags"""

    mode: ConfigMode
    input: Optional[Path] = None
    coeffs: Optional[Path] = None
    highpass: Optional[Path] = None
    feedback: Optional[Path] = None
    branch: str = "lowpass"
    sample_format: Optional[str] = None
    output: Optional[Path] = None
    verify: bool = False
    scale_stages: bool = False
    seed: Optional[int] = None

    @classmethod
    def resolve(cls, args: argparse.Namespace) -> "RunSettings":
        base: Dict[str, Any] = {}
        if args.config is not None:
            descriptor = RunDescriptor(args.config)
            base = {k: getattr(descriptor, k) for k in ("mode",) + descriptor.required[1:] + descriptor.optional}
        flags = {
            "mode": args.mode,
            "input": args.input,
            "coeffs": args.coeffs,
            "highpass": args.highpass,
            "feedback": args.feedback,
            "branch": args.branch,
            "sample_format": args.sample_format,
            "output": args.out,
            "seed": args.seed,
        }
        base.update({k: v for k, v in flags.items() if v is not None})
        if args.verify:
            base["verify"] = True
        if args.scale_stages:
            base["scale_stages"] = True
        if base.get("mode") is None:
            raise ValueError("RunSettings.resolve: no mode given, use --mode or a descriptor")
        base["mode"] = ConfigMode.parse(base["mode"])
        for key in ("input", "coeffs", "highpass", "feedback", "output"):
            if base.get(key) is not None:
                base[key] = Path(base[key])
        settings = cls(**base)
        if settings.sample_format is None:
            settings.sample_format = default_sample_format(settings.mode)
        if settings.sample_format == "block" and settings.mode is not ConfigMode.DCT:
            raise ValueError(
                f"RunSettings.resolve: block samples are only read in DCT mode, not {settings.mode.value}"
            )
        return settings


def load_spec(settings: RunSettings) -> Any:
    """Parameters for the configured mode, from coefficient files where given"""
    mode = settings.mode
    if mode is ConfigMode.FIR:
        return FirSpec.from_file(settings.coeffs) if settings.coeffs else default_spec(mode)
    if mode is ConfigMode.IIR:
        forward = FirSpec.from_file(settings.coeffs) if settings.coeffs else default_spec(mode).forward
        if settings.feedback:
            feedback = read_coefficients(settings.feedback)
        else:
            feedback = [quantize(0.0, Q1_15)] * (forward.length - 1)
        return IirSpec(forward, feedback)
    if mode is ConfigMode.DWT:
        if settings.coeffs and settings.highpass:
            return DilationPair.from_files(settings.highpass, settings.coeffs)
        if settings.coeffs or settings.highpass:
            raise ValueError("load_spec: DWT needs both the lowpass (--coeffs) and the highpass (--highpass) taps")
        return default_spec(mode)
    if mode is ConfigMode.FFT:
        return FftPlan(scale_stages=settings.scale_stages)
    return derive_decomposition()


def load_samples(settings: RunSettings) -> List[Any]:
    mode, fmt = settings.mode, INPUT_FORMATS[settings.mode]
    if settings.input is None:
        seed = 0 if settings.seed is None else settings.seed
        _logger.info(f"load_samples: no input file, generating a {mode.value} stream with seed {seed}")
        rng = np.random.default_rng(seed)
        if settings.sample_format == "block":
            return [generate_stream(mode, rng, DCT_SIZE) for _ in range(DCT_SIZE)]
        return generate_stream(mode, rng)
    if settings.sample_format == "complex":
        return read_complex(settings.input, fmt)
    if settings.sample_format == "block":
        return read_block(settings.input, fmt)
    return read_real(settings.input, fmt)


@dataclass
class RunReport:
    """Summary of one ``run``; serialises with a fixed key order"""

    mode: str
    samples_in: int
    samples_out: int
    saturations: int
    resources: ResourceReport
    verified: Optional[bool] = None
    max_error_lsb: Optional[int] = None
    tolerance_lsb: Optional[int] = None
    output: Optional[str] = None
    elapsed_s: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "mode": self.mode,
            "samples_in": self.samples_in,
            "samples_out": self.samples_out,
            "saturations": self.saturations,
            "verified": self.verified,
            "max_error_lsb": self.max_error_lsb,
            "tolerance_lsb": self.tolerance_lsb,
            "output": self.output,
            "resources": self.resources.to_dict(),
        }
        if self.elapsed_s is not None:
            out["elapsed_s"] = round(self.elapsed_s, 6)
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def render(self) -> str:
        lines = [
            f"mode: {self.mode}",
            f"samples: {self.samples_in} in, {self.samples_out} out",
            f"saturations: {self.saturations}",
        ]
        if self.verified is not None:
            verdict = "PASS" if self.verified else "FAIL"
            lines.append(f"verify: {verdict}, max error {self.max_error_lsb} LSB (limit {self.tolerance_lsb})")
        if self.output:
            lines.append(f"output: {self.output}")
        if self.elapsed_s is not None:
            lines.append(f"elapsed: {self.elapsed_s:.3f} s")
        lines.append(self.resources.render())
        return "\n".join(lines)


def _pool_from_args(args: argparse.Namespace) -> CmPool:
    pool = CmPool()
    for item in getattr(args, "limit", None) or []:
        kind, _, count = item.partition("=")
        if kind not in pool.sizes or not count.isdigit():
            raise ValueError(
                f"_pool_from_args: bad --limit {item!r}, expected KIND=N with KIND in {sorted(pool.sizes)}"
            )
        pool.sizes[kind] = int(count)
    return pool


def run_settings(settings: RunSettings, pool: CmPool, timestamps: bool = True) -> RunReport:
    """Configure, execute, optionally verify, write the output, release"""
    start = time.perf_counter()
    spec = load_spec(settings)
    samples = load_samples(settings)
    tally = Tally()
    netlist = configure(pool, settings.mode, spec, settings.branch)
    try:
        if settings.sample_format == "block":
            # the fabric realizes the 1-D transform; the 2-D block keeps its wide intermediate
            outputs = dct2d(samples, tally)
        else:
            outputs = execute(netlist, samples, tally)
        resources = account(netlist, pool)
    finally:
        release(pool)

    report = RunReport(
        settings.mode.value,
        len(samples) * (DCT_SIZE if settings.sample_format == "block" else 1),
        len(outputs) * (DCT_SIZE if settings.sample_format == "block" else 1),
        tally.saturations,
        resources,
    )
    if settings.verify:
        if settings.sample_format == "block":
            flat = [y for row in outputs for y in row]
            ref = dct2d_direct([[s.value for s in row] for row in samples])
            errors, tolerance = lsb_errors(flat, ref), TOLERANCES["DCT2D"]
            energy = 0.0
        else:
            errors, tolerance, energy = reference_errors(settings.mode, spec, samples, outputs, settings.branch)
        report.max_error_lsb = int(np.max(errors)) if len(errors) else 0
        report.tolerance_lsb = tolerance.max_abs_lsb
        report.verified = report.max_error_lsb <= tolerance.max_abs_lsb and (
            tolerance.relative_energy == 0 or energy <= tolerance.relative_energy
        )
    if settings.output is not None:
        write_samples(settings.output, outputs)
        report.output = str(settings.output)
    if timestamps:
        report.elapsed_s = time.perf_counter() - start
    return report


def cmd_run(args: argparse.Namespace) -> int:
    settings = RunSettings.resolve(args)
    report = run_settings(settings, _pool_from_args(args), timestamps=not args.no_timestamps)
    _emit(args, report.to_yaml() if args.format == "machine" else report.render())
    if report.verified is False:
        _logger.error(f"cmd_run: {settings.mode.value} failed verification ({report.max_error_lsb} LSB)")
        return EXIT_VERIFY
    _logger.info(f"cmd_run: {settings.mode.value} done, {report.samples_out} samples out")
    return EXIT_OK


# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----
# modes / resources / verify-all
# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----


def cmd_modes(args: argparse.Namespace) -> int:
    rows = [(mode.value, str(decode(mode))) for mode in CONTROL_WORDS]
    if args.format == "machine":
        _emit(args, yaml.safe_dump({"modes": [{"mode": m, "control": c} for m, c in rows]}, sort_keys=False))
    else:
        _emit(args, "\n".join(f"{m:<4} {c}" for m, c in rows))
    return EXIT_OK


def cmd_resources(args: argparse.Namespace) -> int:
    modes = [ConfigMode.parse(args.mode)] if args.mode else list(CONTROL_WORDS)
    pool = _pool_from_args(args)
    reports = []
    for mode in modes:
        netlist = configure(pool, mode, branch=args.branch or "lowpass")
        try:
            reports.append(account(netlist, pool))
        finally:
            release(pool)
    if args.format == "machine":
        _emit(args, yaml.safe_dump({"resources": [r.to_dict() for r in reports]}, sort_keys=False))
    else:
        text = "\n\n".join(r.render() for r in reports)
        if not args.mode:
            text += "\n\n" + pool_summary(pool.sizes).to_string()
        _emit(args, text)
    return EXIT_OK


VERIFY_CHECKS = ("decoder", "oracle", "structural", "census")


def verify_mode(mode: ConfigMode, trials: int, rng: np.random.Generator) -> Dict[str, bool]:
    """Decoder word, kernel against reference, netlist against kernel, census against the published counts"""
    results = {"decoder": str(decode(mode)) == "".join(str(b) for b in CONTROL_WORDS[mode])}
    oracle_ok, structural_ok = True, True
    branches = ("lowpass", "highpass") if mode is ConfigMode.DWT else ("lowpass",)
    pool = CmPool()
    census_ok = True
    for _ in range(trials):
        spec = random_spec(mode, rng)
        samples = generate_stream(mode, rng, FFT_SIZE if mode in (ConfigMode.FFT, ConfigMode.DCT) else 64)
        for branch in branches:
            kernel = behavioural(mode, spec, samples, branch)
            errors, tolerance, energy = reference_errors(mode, spec, samples, kernel, branch)
            if int(np.max(errors)) > tolerance.max_abs_lsb:
                oracle_ok = False
            if tolerance.relative_energy and energy > tolerance.relative_energy:
                oracle_ok = False
            netlist = configure(pool, mode, spec, branch)
            try:
                structural_ok &= _same(execute(netlist, samples), kernel)
                report = account(netlist, pool)
                census_ok &= not report.unexplained and report.within_pool
            finally:
                release(pool)
    results.update({"oracle": oracle_ok, "structural": structural_ok, "census": census_ok and pool.conserved()})
    return results


def cmd_verify_all(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    matrix = {}
    for mode in CONTROL_WORDS:
        _logger.info(f"cmd_verify_all: {mode.value}, {args.trials} trials")
        matrix[mode.value] = verify_mode(mode, args.trials, rng)
    frame = pd.DataFrame(matrix).T.loc[:, list(VERIFY_CHECKS)]
    passed = bool(frame.values.all())
    if args.format == "machine":
        doc = {"passed": passed, "matrix": {m: dict(r) for m, r in matrix.items()}}
        _emit(args, yaml.safe_dump(doc, sort_keys=False))
    else:
        _emit(args, frame.replace({True: "PASS", False: "FAIL"}).to_string())
    return EXIT_OK if passed else EXIT_VERIFY


# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----
# CLI plumbing
# ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ---- ----


def _emit(args: argparse.Namespace, text: str) -> None:
    """Print, or write to ``--report`` when given"""
    if getattr(args, "report", None):
        atomic_write(args.report, text + "\n")
    else:
        print(text)


def parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="fpda", description="Field programmable DSP array model")
    parser.add_argument("--version", action="version", version=f"FPDA {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    parser.add_argument("--log-file", default=None, help="also log to this file")
    parser.add_argument("--format", choices=("text", "machine"), default="text", help="report style")
    parser.add_argument("--report", default=None, help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("modes", help="list the configuration modes and their control words")

    resources = sub.add_parser("resources", help="CM census against the published counts")
    resources.add_argument("--mode", default=None)
    resources.add_argument("--branch", choices=("lowpass", "highpass"), default=None)
    resources.add_argument("--limit", action="append", metavar="KIND=N", help="shrink the pool")

    run = sub.add_parser("run", help="configure a mode and stream samples through it")
    run.add_argument("--config", default=None, help="RunDescriptor yaml file")
    run.add_argument("--mode", default=None)
    run.add_argument("--in", dest="input", default=None, help="sample file; a seeded stream when omitted")
    run.add_argument("--coeffs", default=None, help="coefficient file (FIR/IIR forward, DWT lowpass)")
    run.add_argument("--highpass", default=None, help="DWT highpass coefficient file")
    run.add_argument("--feedback", default=None, help="IIR feedback coefficient file, b[1] first")
    run.add_argument("--branch", choices=("lowpass", "highpass"), default=None)
    run.add_argument("--sample-format", choices=SAMPLE_FORMATS, default=None)
    run.add_argument("--out", default=None, help="output sample file")
    run.add_argument("--verify", action="store_true", help="compare against the reference implementation")
    run.add_argument("--scale-stages", action="store_true", help="halve every FFT stage output")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--limit", action="append", metavar="KIND=N", help="shrink the pool")
    run.add_argument("--no-timestamps", action="store_true", help="leave elapsed time out of the report")

    verify = sub.add_parser("verify-all", help="check every mode against its reference and its kernel")
    verify.add_argument("--trials", type=int, default=20)
    verify.add_argument("--seed", type=int, default=None)
    return parser.parse_args(argv)


def setup_logging(verbosity: int, log_file: Optional[str] = None) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    formatter = logging.Formatter("%(asctime)s:%(levelname)s:%(name)s:: %(message)s")
    root = logging.getLogger("FPDA")
    root.setLevel(level)
    for old in list(root.handlers):
        root.removeHandler(old)
        old.close()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "modes": cmd_modes,
    "run": cmd_run,
    "resources": cmd_resources,
    "verify-all": cmd_verify_all,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and map failures to exit codes"""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_BAD_INPUT
    setup_logging(args.verbose, args.log_file)
    _logger.debug(f"main: {args}")
    try:
        return COMMANDS[args.command](args)
    except PoolExhausted as e:
        _logger.error(f"main: {e}")
        return EXIT_POOL
    except (SampleFileError, KeyError, ValueError, OSError, FpdaError) as e:
        _logger.error(f"main: {e}")
        return EXIT_BAD_INPUT


def run() -> None:
    """Entry point for the ``fpda`` console script"""
    sys.exit(main())


if __name__ == "__main__":
    # python -m FPDA.cli run --mode FIR --in impulse.txt --verify
    run()
