import enum
from dataclasses import dataclass
from typing import Optional, Tuple


class ChiMethod(str, enum.Enum):
    STRUCTURAL = "structural"
    PACKING_EXACT = "packing_exact"
    GENERIC_EXACT = "generic_exact"


@dataclass(frozen=True)
class ChiResult:
    chi: int
    method: ChiMethod
    # certificate[v] = couleur du sommet v
    certificate: Optional[Tuple[int, ...]] = None

    @property
    def colors_used(self) -> int:
        return len(set(self.certificate)) if self.certificate is not None else 0
