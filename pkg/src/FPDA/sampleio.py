"""
Sample files.

* real: one decimal per line
* complex: ``re,im`` per line
* block: 16 lines of 16 comma-separated decimals

Blank lines and ``#`` comments are skipped. Values outside the target format are clipped to it
and reported once per file. Writers go through a temporary sibling and a rename, so a failed
write leaves nothing behind.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

from .errors import SampleFileError
from .numerics import ComplexFixed, FixedPoint, QFormat, quantize

_logger = logging.getLogger(__name__)

BLOCK_SIZE = 16


def _lines(path: Path) -> Iterable[Tuple[int, str]]:
    try:
        text = path.read_text()
    except OSError as e:
        raise SampleFileError(str(path), 0, f"cannot read: {e}") from e
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if content:
            yield lineno, content


class _Clipper:
    """Quantizes with clipping and remembers how many values were clipped"""

    def __init__(self, path: Path, format: QFormat) -> None:
        self.path = path
        self.format = format
        self.clipped = 0
        self.top = format.max_raw / format.scale
        self.bottom = format.min_raw / format.scale

    def __call__(self, text: str, lineno: int) -> FixedPoint:
        try:
            value = float(text)
        except ValueError as e:
            raise SampleFileError(str(self.path), lineno, f"not a decimal: {text!r}") from e
        if value != value:
            raise SampleFileError(str(self.path), lineno, "NaN sample")
        if not self.bottom <= value <= self.top:
            self.clipped += 1
            value = min(max(value, self.bottom), self.top)
        return quantize(value, self.format)

    def report(self) -> None:
        if self.clipped:
            _logger.warning(f"{self.path}: clipped {self.clipped} values to the {self.format} range")


def read_real(path: Union[str, Path], format: QFormat) -> List[FixedPoint]:
    path = Path(path)
    clip = _Clipper(path, format)
    out = [clip(text, lineno) for lineno, text in _lines(path)]
    clip.report()
    if not out:
        raise SampleFileError(str(path), 0, "no samples")
    return out


def read_complex(path: Union[str, Path], format: QFormat) -> List[ComplexFixed]:
    path = Path(path)
    clip = _Clipper(path, format)
    out = []
    for lineno, text in _lines(path):
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise SampleFileError(str(path), lineno, f"expected 're,im', got {text!r}")
        out.append(ComplexFixed(clip(parts[0], lineno), clip(parts[1], lineno)))
    clip.report()
    if not out:
        raise SampleFileError(str(path), 0, "no samples")
    return out


def read_block(path: Union[str, Path], format: QFormat, size: int = BLOCK_SIZE) -> List[List[FixedPoint]]:
    path = Path(path)
    clip = _Clipper(path, format)
    rows = []
    for lineno, text in _lines(path):
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != size:
            raise SampleFileError(str(path), lineno, f"expected {size} values, got {len(parts)}")
        rows.append([clip(p, lineno) for p in parts])
    clip.report()
    if len(rows) != size:
        raise SampleFileError(str(path), 0, f"expected {size} rows, got {len(rows)}")
    return rows


def format_real(s: FixedPoint) -> str:
    """Exact decimal form of a fixed-point sample"""
    return f"{s.value:.{s.format.fraction_bits}f}"


def format_complex(z: ComplexFixed) -> str:
    return f"{format_real(z.re)},{format_real(z.im)}"


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write to a temporary sibling and rename over ``path``"""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_samples(path: Union[str, Path], samples: Sequence) -> None:
    """One sample per line; complex samples as ``re,im``, 2-D blocks as comma-separated rows"""
    lines = []
    for s in samples:
        if isinstance(s, ComplexFixed):
            lines.append(format_complex(s))
        elif isinstance(s, FixedPoint):
            lines.append(format_real(s))
        else:
            lines.append(",".join(format_real(v) for v in s))
    atomic_write(path, "\n".join(lines) + "\n")
    _logger.debug(f"write_samples: {len(lines)} lines to {path}")
