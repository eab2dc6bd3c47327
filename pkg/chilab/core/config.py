from typing import List
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator


class Settings(BaseSettings):
    # Application
    PROJECT_NAME: str = "chilab"
    PROJECT_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"  # development, production
    LOG_DIR: str = "logs"

    # Exécution
    THREADS: int = 1

    # Garde-fous des solveurs exacts
    TRIANGLE_BUDGET: int = 1_000_000
    PACKING_BUDGET: int = 1_000_000
    GENERIC_CHI_MAX_N: int = 20
    EXHAUSTIVE_SLOT_CAP: int = 25

    # Constantes non fixées numériquement par la théorie
    DEFAULT_DELTA: float = 0.1
    DEFAULT_EPSILON: float = 0.1
    DEFAULT_HALL_C: float = 10.0
    DEFAULT_SAMPLES_PER_SIZE: int = 200

    # Statistiques
    KS_RETENTION_LIMIT: int = 1_000_000

    # Campagnes exécutées par `oracle-suite`
    ORACLE_SUITES: List[str] = ["triangles", "matching", "chromatic", "moments", "audit", "martingale"]
    # plus grand n tiré par chaque famille
    ORACLE_TRIANGLES_MAX_N: int = 12
    ORACLE_MATCHING_MAX_N: int = 12
    ORACLE_CHROMATIC_MAX_N: int = 14
    ORACLE_AUDIT_MAX_N: int = 12
    ORACLE_MARTINGALE_MAX_N: int = 16
    # voisinages tirés par pas au-delà de l'énumération par masques
    ORACLE_MARTINGALE_NEIGHBORHOODS: int = 16

    @field_validator("ORACLE_SUITES", mode="before")
    @classmethod
    def assemble_oracle_suites(cls, v):
        if isinstance(v, str) and not v.startswith("["):
            return [i.strip() for i in v.split(",") if i.strip()]
        elif isinstance(v, (list, str)):
            return v
        raise ValueError(v)

    @field_validator("THREADS")
    @classmethod
    def check_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError("THREADS doit être >= 1")
        return v

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="CHILAB_",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
