from pathlib import Path
from typing import Any, Dict, Optional, Union
import logging
import warnings

import yaml

from .fabric import ConfigMode

_logger = logging.getLogger(__name__)

SAMPLE_FORMATS = ("real", "complex", "block")
BRANCHES = ("lowpass", "highpass")


def default_sample_format(mode: ConfigMode) -> str:
    return "complex" if mode is ConfigMode.FFT else "real"


class RunDescriptor:
    """Describe one run of the array: which mode to configure, which files to read and write.

    The file holds a single top-level key named after this class::

        RunDescriptor:
          mode: FIR
          input: impulse.txt
          coeffs: lowpass16.txt

    Required Fields in Config:
        mode (str): one of FIR, IIR, DCT, FFT, DWT
        input (str): sample file, relative paths are taken from the descriptor's directory

    Optional Fields in Config:
        coeffs (str): coefficient file, forward taps for FIR/IIR, lowpass taps for DWT
        highpass (str): DWT highpass taps, only read together with ``coeffs``
        feedback (str): IIR feedback taps b[1], b[2], ...
        branch (str): DWT branch to run, "lowpass" (default) or "highpass"
        sample_format (str): "real", "complex" or "block"; "complex" for FFT, "real" otherwise
        output (str): where to write the output samples
        verify (bool): compare against the reference implementation, default False
        scale_stages (bool): halve every FFT stage output, default False
        seed (int): seed for generated streams when no input is given

    Args:
        config_filename (str): path to the yaml file

    Sets Attributes:
        mode (ConfigMode): the configuration mode
        input, coeffs, highpass, feedback, output (pathlib.Path or None): resolved paths
        config (dict): the raw configuration section
    """

    required = ("mode", "input")
    optional = (
        "coeffs",
        "highpass",
        "feedback",
        "branch",
        "sample_format",
        "output",
        "verify",
        "scale_stages",
        "seed",
    )
    paths = ("input", "coeffs", "highpass", "feedback", "output")

    def __init__(self, config_filename: Union[str, Path]) -> None:
        name = self.__class__.__name__
        self.config_filename = Path(config_filename)
        self.mode: Optional[ConfigMode] = None
        self.input: Optional[Path] = None
        self.coeffs: Optional[Path] = None
        self.highpass: Optional[Path] = None
        self.feedback: Optional[Path] = None
        self.output: Optional[Path] = None
        self.branch: str = "lowpass"
        self.sample_format: Optional[str] = None
        self.verify: bool = False
        self.scale_stages: bool = False
        self.seed: Optional[int] = None

        with open(self.config_filename, "r") as f:
            contents = yaml.safe_load(f) or {}
        try:
            self.config: Dict[str, Any] = contents[name]
        except (KeyError, TypeError):
            raise KeyError(f"{name}.__init__: Could not find section {name} in {config_filename}")

        for key in self.required:
            try:
                setattr(self, key, self.config[key])
            except KeyError:
                raise KeyError(f"{name}.__init__: Could not find {key} in {config_filename}, but this is required")

        for key in self.optional:
            if key in self.config:
                setattr(self, key, self.config[key])
            else:
                _logger.debug(f"{name}.__init__: Could not find {key} in {config_filename}, using default")

        self.mode = ConfigMode.parse(self.mode)
        for key in self.paths:
            value = getattr(self, key)
            if value is not None:
                setattr(self, key, self._resolve(value))

        if self.branch not in BRANCHES:
            raise ValueError(f"{name}.__init__: branch must be one of {BRANCHES}, got {self.branch!r}")
        if self.sample_format is None:
            self.sample_format = default_sample_format(self.mode)
        elif self.sample_format not in SAMPLE_FORMATS:
            raise ValueError(f"{name}.__init__: sample_format must be one of {SAMPLE_FORMATS}")

        if self.mode in (ConfigMode.FIR, ConfigMode.IIR) and self.coeffs is None:
            warnings.warn(f"{name}.__init__: Could not find 'coeffs' in {config_filename}, using the 16-tap averager")
        if self.mode is ConfigMode.IIR and self.feedback is None:
            warnings.warn(f"{name}.__init__: Could not find 'feedback' in {config_filename}, feedback taps are zero")

    def _resolve(self, value: Union[str, Path]) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.config_filename.parent / path

    def as_dict(self) -> Dict[str, Any]:
        out = {"mode": self.mode.value}
        for key in self.required[1:] + self.optional:
            value = getattr(self, key)
            out[key] = str(value) if isinstance(value, Path) else value
        return out
