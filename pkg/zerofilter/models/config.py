"""Run configuration (INI sections) and the CHS1 snapshot layout."""

import struct
from dataclasses import dataclass, field
from typing import Optional, Tuple

from zerofilter.models.grid import Grid
from zerofilter.models.params import ModelParams, StepControl
from zerofilter.models.sweep import (
    DEFAULT_ALPHAS,
    DEFAULT_NS,
    InitialDatum,
    SweepConfig,
)

SNAPSHOT_MAGIC = b"CHS1"
SNAPSHOT_VERSION = 1
SNAPSHOT_HEADER = struct.Struct("<4sIQddd")
SAMPLE_DTYPE = "<f8"

OUTPUT_FORMATS = ("csv", "json", "gp")

# section -> key -> INI default; every accepted key is listed here
DEFAULTS = {
    "grid": {"n_points": "256", "period": "2pi"},
    "model": {"alpha": "0.1", "nu": "0", "gamma": "2", "dealias": "true"},
    "time": {
        "t_end": "",
        "cfl": "0.3",
        "dt_max": "0.01",
        "save_every": "1",
        "breaking_slope_threshold": "",
        "norm_cap": "1e6",
        "integrator": "auto",
    },
    "data": {"u0": "band_limited"},
    "sweep": {
        "alphas": ", ".join(str(a) for a in DEFAULT_ALPHAS),
        "ns": ", ".join(str(n) for n in DEFAULT_NS),
        "sobolev_s": "2",
        "cutoff_mode": "sharp",
        "jobs": "1",
    },
    "output": {"dir": "", "formats": "csv, json, gp"},
}


@dataclass(frozen=True)
class SweepSection:
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    ns: Tuple[int, ...] = DEFAULT_NS
    sobolev_s: float = 2.0
    cutoff_mode: str = "sharp"
    jobs: int = 1


@dataclass(frozen=True)
class OutputSection:
    dir: Optional[str] = None
    formats: Tuple[str, ...] = OUTPUT_FORMATS


@dataclass(frozen=True)
class RunConfig:
    grid: Grid = field(default_factory=lambda: Grid(256))
    model: ModelParams = field(default_factory=ModelParams)
    control: StepControl = field(default_factory=lambda: StepControl(t_end=None))
    datum: InitialDatum = field(default_factory=InitialDatum)
    sweep: SweepSection = field(default_factory=SweepSection)
    output: OutputSection = field(default_factory=OutputSection)

    @property
    def norm_indices(self):
        s = self.sweep.sobolev_s
        return (s, s - 1.0)

    def run_control(self):
        """Step control recording the H^s and H^(s-1) norms."""
        return self.control.replace(norm_indices=self.norm_indices)

    def sweep_config(self):
        return SweepConfig(
            datum=self.datum,
            s=self.sweep.sobolev_s,
            alphas=self.sweep.alphas,
            ns=self.sweep.ns,
            n_points=self.grid.n_points,
            period=self.grid.period,
            nu=self.model.nu,
            gamma=self.model.gamma,
            dealias=self.model.dealias,
            control=self.run_control(),
            cutoff_mode=self.sweep.cutoff_mode,
        )
