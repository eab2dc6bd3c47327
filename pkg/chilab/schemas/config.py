import enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from chilab.core.config import settings
from chilab.core.exceptions import ConfigError


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


# n'influencent ni les tirages ni les résultats
EXECUTION_KEYS = ("threads", "output")


class ExperimentConfig(BaseModel):
    """
    Configuration d'une campagne.

    Se lit depuis un fichier clé=valeur (commentaires '#'), les options de la
    ligne de commande l'emportant sur le fichier. Les clés inconnues sont refusées.
    """
    model_config = ConfigDict(extra="forbid")

    command: str
    n: Optional[int] = None
    q: Optional[float] = None
    q_coeff: float = 1.0
    q_exp: Optional[float] = None
    trials: int = 1
    seed: int = 0
    threads: int = settings.THREADS
    delta: float = settings.DEFAULT_DELTA
    epsilon: float = settings.DEFAULT_EPSILON
    hall_c: float = settings.DEFAULT_HALL_C
    retries: int = 1
    samples_per_size: int = settings.DEFAULT_SAMPLES_PER_SIZE
    inner_samples: int = 200
    steps: Optional[int] = None
    full_chain: bool = False
    compute_chi: bool = False
    bernoulli: bool = False
    graph: Optional[str] = None
    q_table: Optional[str] = None
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    triangle_budget: int = settings.TRIANGLE_BUDGET
    packing_budget: int = settings.PACKING_BUDGET

    @field_validator("n")
    @classmethod
    def validate_n(cls, v):
        if v is not None and v < 0:
            raise ValueError("n doit être positif ou nul")
        return v

    @field_validator("q")
    @classmethod
    def validate_q(cls, v):
        if v is not None and not 0.0 <= v <= 1.0:
            raise ValueError("q doit appartenir à [0,1]")
        return v

    @field_validator("trials", "threads", "retries", "samples_per_size", "inner_samples")
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError("la valeur doit être >= 1")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if not 0 <= v < 1 << 64:
            raise ValueError("la graine doit tenir sur 64 bits non signés")
        return v

    @field_validator("delta", "epsilon")
    @classmethod
    def validate_fraction(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError("la valeur doit appartenir à ]0,1]")
        return v

    @model_validator(mode="after")
    def check_q_source(self):
        if self.q is not None and self.q_exp is not None:
            raise ValueError("q et q_exp sont exclusifs")
        if self.q_exp is not None and (self.q_exp <= 0 or self.q_coeff <= 0):
            raise ValueError("la famille q(n) = c·n^(-a) exige c > 0 et a > 0")
        return self

    def q_at(self, n: Optional[int] = None) -> float:
        """q littéral, ou c·n^(-a) évalué en n (par défaut la taille de la campagne)."""
        if self.q is not None:
            return self.q
        if self.q_exp is None:
            raise ConfigError("q ou q_exp doit être fourni", errors=[{"loc": ["q"], "msg": "Field required", "type": "missing"}])
        size = self.n if n is None else n
        if not size:
            raise ConfigError("n est requis pour évaluer q(n)", errors=[{"loc": ["n"], "msg": "Field required", "type": "missing"}])
        return self.q_coeff * size ** (-self.q_exp)

    # --- Sérialisation clé=valeur -----------------------------------------

    def reproducible_dump(self) -> Dict[str, Any]:
        """Config sans les clés d'exécution : deux runs de même graine donnent le même dict."""
        return self.model_dump(mode="json", exclude=set(EXECUTION_KEYS))

    def to_text(self, reproducible: bool = False) -> str:
        values = self.reproducible_dump() if reproducible else self.model_dump(mode="json")
        lines = []
        for key, value in values.items():
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse_text(text: str) -> Dict[str, str]:
        values: Dict[str, str] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    f"ligne {number} invalide : {raw!r}",
                    errors=[{"loc": ["line", number], "msg": "expected key=value", "type": "syntax"}],
                )
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
        return values

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.resolve(cls.parse_text(text))

    @classmethod
    def resolve(
        cls,
        file_values: Optional[Mapping[str, Any]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "ExperimentConfig":
        """Fusionne fichier puis options (non nulles) et valide."""
        merged: Dict[str, Any] = dict(file_values or {})
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return cls(**merged)
        except ValidationError as exc:
            raise ConfigError.from_validation(exc) from exc

    @classmethod
    def load(
        cls,
        path: Optional[Path],
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "ExperimentConfig":
        file_values = cls.parse_text(Path(path).read_text(encoding="utf-8")) if path else {}
        return cls.resolve(file_values, overrides)
