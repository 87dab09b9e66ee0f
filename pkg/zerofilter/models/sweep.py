"""Zero-filter study configuration, per-cell results and the sweep report."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from zerofilter.models.grid import Grid
from zerofilter.models.params import ModelParams, StepControl
from zerofilter.models.partition import DyadicPartition
from zerofilter.utils import ConfigError

DEFAULT_ALPHAS = (0.2, 0.1, 0.05, 0.025, 0.0125)
DEFAULT_NS = (2, 3, 4, 5, 6)
MIN_SOBOLEV = 1.5
DATUM_KINDS = ("band_limited", "sine", "rough", "peakon")
DATUM_OPTIONS = {
    "band_limited": {},
    "sine": {},
    "rough": {"s": 2.0, "seed": 0},
    "peakon": {"c": 1.0, "alpha": 0.5, "xi_c": None},
}


@dataclass(frozen=True)
class InitialDatum:
    """A named initial datum: `kind` or `kind:key=value,key=value`."""

    kind: str = "band_limited"
    options: Tuple[Tuple[str, object], ...] = ()

    @classmethod
    def parse(cls, text):
        text = text.strip()
        kind, _, rest = text.partition(":")
        kind = kind.strip().replace("-", "_")
        if kind not in DATUM_KINDS:
            raise ConfigError(
                f"unknown initial datum {text!r}; expected one of {DATUM_KINDS}"
            )
        allowed = dict(DATUM_OPTIONS[kind])
        for item in filter(None, (part.strip() for part in rest.split(","))):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in allowed:
                raise ConfigError(f"bad option {item!r} for datum {kind!r}")
            try:
                allowed[key] = int(value) if key == "seed" else float(value)
            except ValueError:
                raise ConfigError(f"malformed number in {item!r}") from None
        return cls(kind, tuple(sorted(allowed.items())))

    def option(self, key):
        return dict(self.options)[key]

    @property
    def band_limited(self):
        return self.kind in ("band_limited", "sine")

    def __str__(self):
        values = [f"{k}={v}" for k, v in self.options if v is not None]
        return self.kind if not values else f"{self.kind}:{','.join(values)}"


@dataclass(frozen=True)
class SweepConfig:
    datum: InitialDatum = field(default_factory=InitialDatum)
    s: float = 2.0
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    ns: Tuple[int, ...] = DEFAULT_NS
    n_points: int = 256
    period: float = 2.0 * np.pi
    nu: float = 0.0
    gamma: float = 2.0
    dealias: bool = True
    control: StepControl = field(default_factory=StepControl)
    cutoff_mode: str = "sharp"

    def __post_init__(self):
        if not self.s > MIN_SOBOLEV:
            raise ConfigError(f"Sobolev index must exceed 3/2, got {self.s}")
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
            raise ConfigError("every alpha must lie in (0, 1)")
        if any(b >= a for a, b in zip(alphas, alphas[1:])):
            raise ConfigError("alphas must be strictly decreasing")
        ns = tuple(int(n) for n in self.ns)
        if not ns or ns[0] < 0 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("ns must be nonnegative and strictly increasing")
        top = DyadicPartition(self.grid).q_max + 1
        if ns[-1] > top:
            raise ConfigError(f"cutoff n={ns[-1]} exceeds the grid limit {top}")
        if self.cutoff_mode not in ("sharp", "smooth"):
            raise ConfigError(
                f"cutoff_mode must be sharp or smooth, got {self.cutoff_mode!r}"
            )
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "ns", ns)
        indices = (float(self.s), float(self.s) - 1.0)
        if self.control.norm_indices != indices:
            control = self.control.replace(norm_indices=indices)
            object.__setattr__(self, "control", control)

    @property
    def grid(self):
        return Grid(self.n_points, self.period)

    def params(self, alpha):
        return ModelParams(
            alpha=alpha, nu=self.nu, gamma=self.gamma, dealias=self.dealias
        )


@dataclass(frozen=True)
class DecompositionTerms:
    """Inter-solution distances of the three-term split at shared times.

    `series[index][name]` holds the H^index distance for name in
    outer_alpha, middle, outer_zero, total.
    """

    alpha: float
    n: int
    times: np.ndarray
    series: Dict[float, Dict[str, np.ndarray]]
    s: float
    tail: float

    def term(self, name, index=None):
        return self.series[self.s if index is None else index][name]

    @property
    def term_outer_alpha(self):
        return self.term("outer_alpha")

    @property
    def term_middle(self):
        return self.term("middle")

    @property
    def term_outer_zero(self):
        return self.term("outer_zero")

    @property
    def total(self):
        return self.term("total")

    def triangle_defect(self, index=None):
        """max_t (total - sum of terms); never above round-off."""
        parts = ("outer_alpha", "middle", "outer_zero")
        bound = sum(self.term(name, index) for name in parts)
        return float(np.max(self.term("total", index) - bound))


@dataclass(frozen=True)
class FitResult:
    exponents: Dict[str, float]
    constant: float
    implied_constant: float
    r_squared: float
    residual_max: float
    n_samples: int

    def exponent(self, name):
        return self.exponents.get(name, 0.0)

    def predict(self, alpha, n):
        """C alpha^p_alpha 2^(p_n n) at one cell."""
        return (
            self.constant
            * alpha ** self.exponent("alpha")
            * 2.0 ** (self.exponent("n") * n)
        )

    def as_dict(self):
        return {
            "exponents": dict(self.exponents),
            "constant": self.constant,
            "implied_constant": self.implied_constant,
            "r_squared": self.r_squared,
            "residual_max": self.residual_max,
            "n_samples": self.n_samples,
        }


@dataclass(frozen=True)
class UniformBoundReport:
    suprema: Dict[float, float]
    higher_suprema: Dict[float, float]
    spread: float
    higher_spread: float
    energy_rate_constant: float
    growth_trend: bool
    passed: bool


@dataclass(frozen=True)
class Step2Report:
    constants: Dict[Tuple[float, int], float]
    initial_constants: Dict[Tuple[float, int], float]
    lower_constants: Dict[Tuple[float, int], float]
    spread_by_n: Dict[int, float]
    n_growth: float
    fit: Optional[FitResult]
    passed: bool

    @property
    def max_constant(self):
        return max(self.constants.values())


@dataclass(frozen=True)
class Step3Report:
    lower_suprema: Dict[Tuple[float, int], float]
    hs_constants: Dict[Tuple[float, int], float]
    min_interpolation_deficit: float
    initial_max: float
    fit: Optional[FitResult]
    window: Tuple[Tuple[float, int], ...]
    conclusive: bool
    passed: bool

    @property
    def hs_constant(self):
        return max(self.hs_constants.values())


@dataclass(frozen=True)
class ConvergenceReport:
    errors: Dict[float, float]
    lower_errors: Dict[float, float]
    ratios: Tuple[float, ...]
    monotone: bool
    fit: Optional[FitResult]
    passed: bool


@dataclass(frozen=True)
class FinalBoundCell:
    alpha: float
    n: int
    total: float
    model: float
    c1: float = 0.0

    @property
    def ratio(self):
        return self.total / self.model if self.model > 0 else float("inf")


@dataclass(frozen=True)
class FinalBoundReport:
    cells: Tuple[FinalBoundCell, ...]
    c1: float
    c2: float
    margin: float
    tracking: float
    tracking_band: Tuple[float, float]
    passed: bool

    @property
    def tracked(self):
        low, high = self.tracking_band
        return low <= self.tracking <= high


@dataclass(frozen=True)
class ErrorRow:
    alpha: float
    n: Optional[int]
    s: float
    sup_t_error_hs: float
    sup_t_error_hsm1: float
    t_end: float
    status: str


@dataclass(frozen=True)
class SweepReport:
    config: SweepConfig
    rows: Tuple[ErrorRow, ...] = ()
    trajectories: Tuple = ()
    uniform: Optional[UniformBoundReport] = None
    step2: Optional[Step2Report] = None
    step3: Optional[Step3Report] = None
    convergence: Optional[ConvergenceReport] = None
    final: Optional[FinalBoundReport] = None
    skipped: Dict[str, str] = field(default_factory=dict)
    boundary_tail: Optional[float] = None

    @property
    def verdicts(self):
        out = {}
        for name in ("uniform", "step2", "step3", "convergence", "final"):
            part = getattr(self, name)
            if part is not None:
                out[name] = bool(part.passed)
        return out

    @property
    def passed(self):
        return all(self.verdicts.values())
