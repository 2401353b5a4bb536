from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import config

CvStrategy = Literal["cv1", "cv2", "cv3", "cv4"]
InitMethod = Literal["ward", "complete", "single", "kmeans", "external"]
Linkage = Literal["ward", "complete", "single"]
StandardizeOrder = Literal["after", "before", "none"]


class SamplingSpec(BaseModel):
    """Imbalanced sampling design: one requested size per slot, slots filled from distinct groups."""
    group_sizes: List[int] = Field(min_length=1)
    replications: int = Field(default=10, ge=1)
    seed: int = Field(default=config.SEED, ge=0, lt=2**64)
    pinned_labels: Optional[List[str]] = None

    @field_validator("group_sizes")
    @classmethod
    def _sizes_positive(cls, v: List[int]) -> List[int]:
        if any(s < 1 for s in v):
            raise ValueError("every requested group size must be >= 1")
        return v

    @model_validator(mode="after")
    def _pins_match_slots(self):
        if self.pinned_labels is not None:
            if len(self.pinned_labels) != len(self.group_sizes):
                raise ValueError("pinned_labels must name one label per slot")
            if len(set(self.pinned_labels)) != len(self.pinned_labels):
                raise ValueError("pinned_labels must be distinct")
        return self

    @property
    def total(self) -> int:
        return sum(self.group_sizes)


class MergeConfig(BaseModel):
    q_max_cap: int = Field(default=config.DEFAULT_Q_MAX, ge=1)
    cv_strategy: CvStrategy = config.DEFAULT_CV
    mad_scale: float = Field(default=config.MAD_SCALE, gt=0)
    multiplier: float = Field(default=config.CV_MULTIPLIER, gt=0)


class MergeTest(BaseModel):
    # infinite LOF values survive a JSON round trip as "Infinity"
    model_config = ConfigDict(ser_json_inf_nan="strings")

    candidate_point: int
    host_cluster: int
    q_max: int
    lof_value: float
    cv: float
    passed: bool

    @field_validator("lof_value", "cv", mode="before")
    @classmethod
    def _parse_non_finite(cls, v):
        return float(v) if isinstance(v, str) else v


class MergeEvent(BaseModel):
    step: int
    l: int
    m: int
    o: int
    p: int
    distance: float
    test_p: MergeTest
    test_o: Optional[MergeTest] = None
    merged: bool


class EvaluationReport(BaseModel):
    """
    Clustering quality against ground truth.

    purity/f_measure/v_measure/homogeneity/completeness are the whole-solution
    measures (P, F, V, H, C). The wf/wpr/wre fields are the size-weighted
    best-match measures over big (_big) and small (_small) groups; None when the
    category holds no group.
    """
    n: int
    k_detected: int
    k_true: int
    small_threshold: int
    purity: float
    f_measure: float
    v_measure: float
    homogeneity: float
    completeness: float
    wf_big: Optional[float] = None
    wpr_big: Optional[float] = None
    wre_big: Optional[float] = None
    wf_small: Optional[float] = None
    wpr_small: Optional[float] = None
    wre_small: Optional[float] = None
    baselines: Optional["ExtremeBaselines"] = None

    def metrics(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


class ExtremeBaselines(BaseModel):
    singletons: EvaluationReport
    one_cluster: EvaluationReport


EvaluationReport.model_rebuild()

METRIC_NAMES = (
    "purity", "f_measure", "v_measure", "homogeneity", "completeness",
    "wf_big", "wpr_big", "wre_big", "wf_small", "wpr_small", "wre_small",
    "k_detected",
)


class RunConfig(BaseModel):
    input: Optional[Path] = None
    label_column: Optional[str] = None
    standardize: bool = True
    init_method: InitMethod = config.DEFAULT_INIT
    k_init: str = config.DEFAULT_K_INIT
    q_max: int = Field(default=config.DEFAULT_Q_MAX, ge=1)
    cv: CvStrategy = config.DEFAULT_CV
    mad_scale: float = Field(default=config.MAD_SCALE, gt=0)
    multiplier: float = Field(default=config.CV_MULTIPLIER, gt=0)
    seed: int = Field(default=config.SEED, ge=0, lt=2**64)
    kmeans_max_iter: int = Field(default=config.KMEANS_MAX_ITER, ge=1)
    initial_partition: Optional[Path] = None
    out_dir: Path = Path("iclust-out")

    @model_validator(mode="after")
    def _external_needs_partition(self):
        if self.init_method == "external" and self.initial_partition is None:
            raise ValueError("init_method 'external' requires initial_partition")
        return self

    def merge_config(self) -> MergeConfig:
        return MergeConfig(q_max_cap=self.q_max, cv_strategy=self.cv,
                           mad_scale=self.mad_scale, multiplier=self.multiplier)


class BenchSpec(BaseModel):
    name: str
    source: str
    label_column: str = "label"
    sampling: Optional[SamplingSpec] = None
    standardize_order: StandardizeOrder = "after"
    small_threshold: int = Field(default=config.SMALL_THRESHOLD, ge=1)

    @property
    def replications(self) -> int:
        return self.sampling.replications if self.sampling else 1


class RunSummary(BaseModel):
    n: int
    p: int
    init_method: InitMethod
    k_init: int
    k_final: int
    merges: int
    rejections: int
    config: MergeConfig
    constant_columns: List[int] = Field(default_factory=list)
    initial_report: Optional[EvaluationReport] = None
    final_report: Optional[EvaluationReport] = None
    timings: Dict[str, float] = Field(default_factory=dict)
