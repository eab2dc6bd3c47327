from chilab.schemas.config import ExperimentConfig, OutputFormat
from chilab.schemas.report import (
    CouplingOutcome,
    DAuditReport,
    ExperimentSummary,
    FormulaAgreement,
    MartingaleEstimate,
    MartingaleRecord,
    Omega0Choice,
    RAuditReport,
    SamplingPlan,
    SizeBucket,
    StatsSummary,
    StructureReport,
)
