"""
Écriture des rapports : CSV (pandas, flottants sur 17 chiffres significatifs)
et résumé JSON embarquant config, version et horodatage.
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from chilab.core.config import settings
from chilab.core.exceptions import make_json_serializable
from chilab.schemas.config import ExperimentConfig
from chilab.schemas.report import ExperimentSummary

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
# seule clé non déterministe d'un résumé
TIMESTAMP_KEY = "generated_at"

Row = Union[BaseModel, Mapping[str, Any]]


def _row(item: Row) -> Dict[str, Any]:
    if isinstance(item, BaseModel):
        return item.model_dump(mode="json", by_alias=True)
    return dict(item)


def to_frame(rows: Iterable[Row]) -> pd.DataFrame:
    return pd.DataFrame([_row(r) for r in rows])


def _format_float(value: float) -> str:
    return "" if pd.isna(value) else FLOAT_FORMAT % value


def to_csv(rows: Iterable[Row]) -> str:
    frame = to_frame(rows)
    # seules les colonnes flottantes passent par %.17g
    floats = frame.select_dtypes(include="floating").columns
    if len(floats):
        frame[floats] = frame[floats].apply(lambda col: col.map(_format_float))
    return frame.to_csv(index=False, lineterminator="\n")


def _plain(obj: Any) -> Any:
    """Types numpy / pydantic vers types JSON natifs."""
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json", by_alias=True)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_plain(v) for v in make_json_serializable(obj)]
    return obj


def build_summary(
    config: ExperimentConfig,
    results: Mapping[str, Any],
    partial: bool = False,
    generated_at: Optional[datetime] = None,
) -> ExperimentSummary:
    return ExperimentSummary(
        command=config.command,
        version=settings.PROJECT_VERSION,
        generated_at=generated_at or datetime.now(timezone.utc),
        config=config.reproducible_dump(),
        partial=partial,
        results=_plain(dict(results)),
    )


def summary_json(summary: ExperimentSummary) -> str:
    payload = summary.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def deterministic_view(text: str) -> Dict[str, Any]:
    """
    Résumé JSON privé de l'horodatage, pour comparer deux exécutions.

    La config embarquée ne contient déjà ni `threads` ni `output`.
    """
    payload = json.loads(text)
    payload.pop(TIMESTAMP_KEY, None)
    return payload


def csv_header_comment(config: ExperimentConfig) -> str:
    """En-tête '#' d'un CSV : version puis config résolue, une clé par ligne."""
    lines = [f"# {settings.PROJECT_NAME} {settings.PROJECT_VERSION}"]
    lines.extend(f"# {line}" for line in config.to_text(reproducible=True).splitlines())
    return "\n".join(lines) + "\n"


def write_outputs(
    config: ExperimentConfig,
    rows: Optional[List[Row]],
    results: Mapping[str, Any],
    partial: bool = False,
) -> List[Path]:
    """
    Écrit <output>.csv (si des lignes sont fournies et format=csv) et
    <output>.json. Sans `output`, le JSON part sur la sortie standard.
    """
    summary = summary_json(build_summary(config, results, partial=partial))
    written: List[Path] = []
    if config.output is None:
        if rows and config.format.value == "csv":
            print(csv_header_comment(config) + to_csv(rows), end="")
        print(summary, end="")
        return written

    base = Path(config.output)
    base.parent.mkdir(parents=True, exist_ok=True)
    if rows is not None and config.format.value == "csv":
        path = Path(f"{base}.csv")
        path.write_text(csv_header_comment(config) + to_csv(rows), encoding="utf-8")
        written.append(path)
    elif rows is not None:
        summary = summary_json(build_summary(config, {**results, "rows": [_row(r) for r in rows]}, partial=partial))
    path = Path(f"{base}.json")
    path.write_text(summary, encoding="utf-8")
    written.append(path)
    logger.info(
        "Outputs written",
        extra={"extra_data": {"command": config.command, "files": [str(p) for p in written], "partial": partial}},
    )
    return written
