from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationInfo,
    computed_field,
    field_validator,
    model_validator,
)
from typing import List, NamedTuple, Optional
from enum import Enum
import math

import numpy as np

# Constants
DEFAULT_EXCESS_NOISE = 0.1
DEFAULT_BITS = 16
DEFAULT_RANGE_SIGMA = 3.0
DEFAULT_ALIM_SIGMA = 10.0
DEFAULT_CHECK_LENGTH = 10**6
DEFAULT_CONFIDENCE_EPSILON = 1e-10
DEFAULT_TRIALS = 1000
DEFAULT_SEED = 12345
CLT_MIN_CHECK_LENGTH = 10**4
CLT_WARNING = "CLT validity requires m > 1e4"
MIN_BITS = 2
MAX_BITS = 24
MAX_SEED = 2**64 - 1
MAX_API_TRIALS = 10_000
NORMALIZATION_TOLERANCE = 1e-9


class BoundaryMomentMode(str, Enum):
    CLAMP_TO_ALIM = "clamp_to_alim"
    LEVEL_VALUE = "level_value"


class SweepVariable(str, Enum):
    CHECK_LENGTH = "check_length"
    CONFIDENCE_EPSILON = "confidence_epsilon"
    RANGE_SIGMA = "range_sigma"
    BITS = "bits"


class GridScale(str, Enum):
    LINEAR = "linear"
    LOG = "log"


INTEGER_VARIABLES = {SweepVariable.CHECK_LENGTH, SweepVariable.BITS}


class SourceModel(BaseModel):
    """Zero-mean Gaussian quadrature in shot-noise units."""

    model_config = ConfigDict(frozen=True)

    excess_noise: float = Field(DEFAULT_EXCESS_NOISE, ge=0.0, allow_inf_nan=False)

    @computed_field
    @property
    def variance(self) -> float:
        return 1.0 + self.excess_noise

    @computed_field
    @property
    def mean(self) -> float:
        return 0.0

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


class QuantizerConfig(BaseModel):
    """
    ADC with full range N (absolute units) and n bits.

    Output levels are i * delta for i in [i_min, i_max], a symmetric set of
    2^n - 1 levels; the two extreme levels absorb everything beyond the range.
    """

    model_config = ConfigDict(frozen=True)

    sampling_range: float = Field(..., gt=0.0, allow_inf_nan=False)
    bits: int = Field(..., ge=MIN_BITS, le=MAX_BITS)
    a_lim: float = Field(..., gt=0.0, allow_inf_nan=False)

    @field_validator('a_lim')
    @classmethod
    def validate_a_lim(cls, v, info: ValidationInfo):
        sampling_range = info.data.get('sampling_range')
        if sampling_range is not None and not v > sampling_range:
            raise ValueError(f'a_lim ({v}) must exceed the sampling range ({sampling_range})')
        return v

    @computed_field
    @property
    def delta(self) -> float:
        return self.sampling_range / 2 ** (self.bits - 1)

    @computed_field
    @property
    def i_max(self) -> int:
        return 2 ** (self.bits - 1) - 1

    @computed_field
    @property
    def i_min(self) -> int:
        return -self.i_max

    @property
    def level_count(self) -> int:
        return self.i_max - self.i_min + 1


class Level(NamedTuple):
    index: int
    value: float
    probability: float


class DiscreteDistribution(BaseModel):
    """Probabilities of the contiguous level indices i_min, i_min + 1, ..."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    delta: float = Field(..., gt=0.0, allow_inf_nan=False)
    i_min: int
    probabilities: np.ndarray

    @field_validator('probabilities', mode='before')
    @classmethod
    def validate_probabilities(cls, v):
        arr = np.array(v, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError('probabilities must be a non-empty 1-D sequence')
        if not np.all(np.isfinite(arr)):
            raise ValueError('probabilities must be finite')
        if np.any(arr < 0.0) or np.any(arr > 1.0 + NORMALIZATION_TOLERANCE):
            raise ValueError('probabilities must lie in [0, 1]')
        arr.flags.writeable = False
        return arr

    @property
    def i_max(self) -> int:
        return self.i_min + self.probabilities.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1, dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return self.indices * self.delta

    @property
    def levels(self) -> List[Level]:
        return [
            Level(int(i), float(v), float(p))
            for i, v, p in zip(self.indices, self.values, self.probabilities)
        ]

    def total(self) -> float:
        return math.fsum(self.probabilities)

    def probability(self, index: int) -> float:
        if not self.i_min <= index <= self.i_max:
            return 0.0
        return float(self.probabilities[index - self.i_min])


class SecuritySummary(BaseModel):
    """Infinite-data security quantities (entropies in bits)."""

    model_config = ConfigDict(frozen=True)

    shannon_bits: float = Field(..., ge=0.0)
    v_bar_x: float
    v_bar_p: float
    lambda_bar: float = Field(..., ge=1.0)
    holevo_bits: float = Field(..., ge=0.0)
    r_dis_bits: float


class FiniteSizeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    check_length: int = Field(DEFAULT_CHECK_LENGTH, ge=1)
    confidence_epsilon: float = Field(DEFAULT_CONFIDENCE_EPSILON, gt=0.0, le=1.0)
    boundary_moment_mode: BoundaryMomentMode = BoundaryMomentMode.CLAMP_TO_ALIM

    @computed_field
    @property
    def clt_warning(self) -> bool:
        return self.check_length < CLT_MIN_CHECK_LENGTH


class BMoments(BaseModel):
    """Moments of b = v^2 + delta * |v| over the level distribution."""

    model_config = ConfigDict(frozen=True)

    mu_a: float
    mu_b: float
    sigma_b_sq: float = Field(..., ge=0.0)


class FiniteSizeResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    moments: BMoments
    delta_v: float = Field(..., ge=0.0)
    v_max: float
    lambda_max: float = Field(..., ge=1.0)
    holevo_finite_bits: float = Field(..., ge=0.0)
    r_finite_bits: float
    warning: Optional[str] = None


class RateParams(BaseModel):
    """User-facing parameter record; range and a_lim in units of sigma."""

    model_config = ConfigDict(frozen=True)

    excess_noise: float = Field(DEFAULT_EXCESS_NOISE, ge=0.0, allow_inf_nan=False)
    bits: int = Field(DEFAULT_BITS, ge=MIN_BITS, le=MAX_BITS)
    range_sigma: float = Field(DEFAULT_RANGE_SIGMA, gt=0.0, allow_inf_nan=False)
    alim_sigma: float = Field(DEFAULT_ALIM_SIGMA, gt=0.0, allow_inf_nan=False)
    check_length: int = Field(DEFAULT_CHECK_LENGTH, ge=1)
    confidence_epsilon: float = Field(DEFAULT_CONFIDENCE_EPSILON, gt=0.0, le=1.0)
    boundary_moment_mode: BoundaryMomentMode = BoundaryMomentMode.CLAMP_TO_ALIM

    @field_validator('alim_sigma')
    @classmethod
    def validate_alim_sigma(cls, v, info: ValidationInfo):
        range_sigma = info.data.get('range_sigma')
        if range_sigma is not None and not v > range_sigma:
            raise ValueError(f'alim_sigma ({v}) must exceed range_sigma ({range_sigma})')
        return v

    def source(self) -> SourceModel:
        return SourceModel(excess_noise=self.excess_noise)

    def quantizer(self) -> QuantizerConfig:
        sigma = self.source().sigma
        return QuantizerConfig(
            sampling_range=self.range_sigma * sigma,
            bits=self.bits,
            a_lim=self.alim_sigma * sigma,
        )

    def finite_config(self) -> FiniteSizeConfig:
        return FiniteSizeConfig(
            check_length=self.check_length,
            confidence_epsilon=self.confidence_epsilon,
            boundary_moment_mode=self.boundary_moment_mode,
        )


class RateReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: RateParams
    sigma: float
    sampling_range: float
    a_lim: float
    summary: SecuritySummary
    finite: FiniteSizeResult
    budget_bits: Optional[float] = None


class TrialConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    trials: int = Field(..., ge=1)
    samples_per_trial: int = Field(..., ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0, le=MAX_SEED)
    source: SourceModel
    quantizer: QuantizerConfig
    confidence_epsilon: float = Field(..., gt=0.0, le=1.0)
    boundary_moment_mode: BoundaryMomentMode = BoundaryMomentMode.LEVEL_VALUE
    workers: int = Field(1, ge=1)
    per_sample: bool = False


class MonteCarloParams(RateParams):
    """RateParams plus the sampling controls; m doubles as samples per trial."""

    boundary_moment_mode: BoundaryMomentMode = BoundaryMomentMode.LEVEL_VALUE
    trials: int = Field(DEFAULT_TRIALS, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0, le=MAX_SEED)
    workers: int = Field(1, ge=1)
    per_sample: bool = False

    def trial_config(self) -> TrialConfig:
        return TrialConfig(
            trials=self.trials,
            samples_per_trial=self.check_length,
            seed=self.seed,
            source=self.source(),
            quantizer=self.quantizer(),
            confidence_epsilon=self.confidence_epsilon,
            boundary_moment_mode=self.boundary_moment_mode,
            workers=self.workers,
            per_sample=self.per_sample,
        )


class CoverageReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    trials: int = Field(..., ge=1)
    hits: int = Field(..., ge=0)
    coverage: float
    empirical_mean_vhat: float = Field(..., serialization_alias='empirical_mean')
    predicted_mean: float
    empirical_var_vhat: float = Field(..., serialization_alias='empirical_var')
    predicted_var: float

    @model_validator(mode='after')
    def validate_hits(self):
        if self.hits > self.trials:
            raise ValueError('hits cannot exceed trials')
        return self


class CoverageCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    detail: str


class SweepSpec(BaseModel):
    """One swept variable over an explicit grid or (start, stop, count, scale)."""

    model_config = ConfigDict(frozen=True)

    variable: SweepVariable
    grid: Optional[List[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    count: Optional[int] = Field(None, ge=1)
    scale: GridScale = GridScale.LINEAR
    fixed: RateParams = Field(default_factory=RateParams)

    @model_validator(mode='after')
    def validate_grid(self):
        explicit = self.grid is not None
        generated = self.start is not None or self.stop is not None or self.count is not None
        if explicit == generated:
            raise ValueError('Give either an explicit grid or start/stop/count, not both')
        if generated and (self.start is None or self.stop is None or self.count is None):
            raise ValueError('start, stop and count are all required for a generated grid')
        if explicit and self.variable in INTEGER_VARIABLES:
            if any(not math.isfinite(x) or x != int(x) for x in self.grid):
                raise ValueError(f'{self.variable.value} grid values must be integers')
        points = self.points()
        if not points:
            raise ValueError('grid must not be empty')
        if not all(math.isfinite(x) for x in points):
            raise ValueError('grid values must be finite')
        if any(b <= a for a, b in zip(points, points[1:])):
            raise ValueError('grid must be strictly increasing')
        if self.scale == GridScale.LOG and points[0] <= 0:
            raise ValueError('log grid requires positive values')
        return self

    def points(self) -> List[float]:
        if self.grid is not None:
            raw = [float(x) for x in self.grid]
        elif self.count == 1:
            raw = [float(self.start)]
        elif self.scale == GridScale.LOG:
            if self.start <= 0 or self.stop <= 0:
                return [0.0]
            raw = np.logspace(math.log10(self.start), math.log10(self.stop), self.count).tolist()
        else:
            raw = np.linspace(self.start, self.stop, self.count).tolist()
        if self.variable in INTEGER_VARIABLES:
            return [float(int(round(x))) for x in raw]
        return raw


class TrialRequest(MonteCarloParams):
    """Monte Carlo request body for the HTTP API; trials are capped per request."""

    trials: int = Field(DEFAULT_TRIALS, ge=1, le=MAX_API_TRIALS)
