from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from chilab.models.matching import WitnessClass


class StructureReport(BaseModel):
    """Résultat d'un essai de la chaîne S(G) -> G - S -> couplage presque parfait"""
    trial: int = 0
    n: int
    q: Optional[float] = None
    seed: Optional[int] = None
    s: int
    deficiency: int
    near_perfect: bool
    chi_structural: int
    chi_exact: Optional[int] = None
    x: int = 0
    y: int = 0
    equipartition_matched: Optional[bool] = None
    hall_witness_size: Optional[int] = None
    witness_class: Optional[WitnessClass] = None
    partition_attempts: int = 0

    @model_validator(mode="after")
    def check_near_perfect(self):
        if self.near_perfect != (self.deficiency <= 1):
            raise ValueError("near_perfect doit valoir deficiency <= 1")
        return self


class FormulaAgreement(BaseModel):
    n: int
    s: int
    chi_structural: int
    chi_exact: int
    agree: bool


class Omega0Choice(BaseModel):
    value: float
    n: int
    q: float
    regime_warning: bool = False


class SizeBucket(BaseModel):
    """Taux de violation d'une propriété pour les ensembles T d'une taille donnée"""
    size: int
    checked: int
    violations: int
    rate: float
    exhaustive: bool = False


class SamplingPlan(BaseModel):
    exhaustive_max_size: int = 2
    sizes: List[int] = []
    samples_per_size: int


class RAuditReport(BaseModel):
    n: int
    q: float
    omega0: float
    x3: int
    x3_bound: float
    prop_i: bool
    max_neighborhood_edges: int
    neighborhood_edges_bound: float
    prop_ii_edges: bool
    max_codegree: int
    codegree_bound: float
    prop_ii_codeg: bool
    prop_iii: List[SizeBucket]
    prop_iv: List[SizeBucket]
    sampling_plan: SamplingPlan


class DAuditReport(BaseModel):
    delta: float
    s_size: int
    buckets: List[SizeBucket]
    sampling_plan: SamplingPlan
    # |S| <= 3·X3 : D(T) ne peut tenir pour |T| >= 1/q
    s_bound: Optional[int] = None


class MartingaleEstimate(BaseModel):
    value: float
    std_error: float = Field(ge=0.0)
    inner_samples: int


class MartingaleRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    i: int
    increment_estimate: float
    std_error: float
    prefix_class: str = Field(alias="class")


class CouplingOutcome(BaseModel):
    trial: int
    seed: int
    s_small: int
    s_large: int
    success: bool
    new_triangles: Optional[int] = None
    expected_new_triangles: Optional[float] = None
    max_degree: Optional[int] = None
    triangles: Optional[int] = None
    planted_triangles: Optional[int] = None
    density_ratio: Optional[float] = None
    degree_event: Optional[bool] = None
    triangle_event: Optional[bool] = None
    s_event: Optional[bool] = None


class StatsSummary(BaseModel):
    n_trials: int
    mean: float
    var: float
    skew: Optional[float] = None
    ks: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None
    q1: Optional[float] = None
    median: Optional[float] = None
    q3: Optional[float] = None


class ExperimentSummary(BaseModel):
    command: str
    version: str
    generated_at: datetime
    config: Dict[str, Any]
    partial: bool = False
    results: Dict[str, Any] = {}
