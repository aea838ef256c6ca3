from typing import Any

from capflow.core.measures.schema import DiscreteMeasure
from capflow.utils.base.repository import FileRepositoryBase


class MeasureRepository(FileRepositoryBase[DiscreteMeasure]):
    name = "measure"

    def to_document(self, obj: DiscreteMeasure) -> dict[str, Any]:
        return {"d": obj.d, "atoms": obj.atoms, "masses": obj.masses}

    def from_document(self, document: dict[str, Any]) -> DiscreteMeasure:
        return DiscreteMeasure(
            d=document.get("d"), atoms=document["atoms"], masses=document["masses"]
        )
