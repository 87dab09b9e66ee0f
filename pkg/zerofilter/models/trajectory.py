from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

COMPLETED = "completed"
BREAKING = "breaking-detected"
NORM_CAP = "norm-cap-exceeded"
INSTABILITY = "instability"


@dataclass(frozen=True)
class RunStatus:
    kind: str = COMPLETED
    time: Optional[float] = None
    reason: str = ""

    @property
    def completed(self):
        return self.kind == COMPLETED

    def __str__(self):
        if self.completed:
            return COMPLETED
        return f"{self.kind}({self.time:.6g})"


@dataclass
class TrajectoryBuilder:
    """Mutable in-progress record; frozen into a Trajectory when the run ends."""

    label: str
    norm_indices: tuple
    times: List[float] = field(default_factory=list)
    fields: list = field(default_factory=list)
    norm_series: Dict[float, List[float]] = field(default_factory=dict)
    min_slope_series: List[float] = field(default_factory=list)
    energy_series: List[float] = field(default_factory=list)
    tail_fraction_series: List[float] = field(default_factory=list)
    status: RunStatus = field(default_factory=RunStatus)

    def __post_init__(self):
        for s in self.norm_indices:
            self.norm_series.setdefault(s, [])

    @property
    def active(self):
        return self.status.completed

    def record(self, u, norms, min_slope, energy, tail_fraction):
        self.times.append(float(u.time))
        self.fields.append(u)
        for s in self.norm_indices:
            self.norm_series[s].append(float(norms[s]))
        self.min_slope_series.append(float(min_slope))
        self.energy_series.append(float(energy))
        self.tail_fraction_series.append(float(tail_fraction))

    def freeze(self):
        return Trajectory(
            label=self.label,
            times=np.array(self.times),
            fields=tuple(self.fields),
            norm_series={s: np.array(v) for s, v in self.norm_series.items()},
            min_slope_series=np.array(self.min_slope_series),
            energy_series=np.array(self.energy_series),
            tail_fraction_series=np.array(self.tail_fraction_series),
            status=self.status,
        )


@dataclass(frozen=True)
class Trajectory:
    label: str
    times: np.ndarray
    fields: tuple
    norm_series: Dict[float, np.ndarray]
    min_slope_series: np.ndarray
    energy_series: np.ndarray
    tail_fraction_series: np.ndarray
    status: RunStatus

    def __len__(self):
        return len(self.fields)

    @property
    def final(self):
        return self.fields[-1]


@dataclass(frozen=True)
class StepDiagnostics:
    """What the breaking detector looks at after each accepted step."""

    time: float
    norms: Dict[float, float]
    min_slope: float
    energy: float
    tail_fraction: float
