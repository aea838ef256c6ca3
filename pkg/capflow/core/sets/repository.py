from typing import Any

from capflow.core.sets.schema import PointCloud, SetSpec, WeightConvention
from capflow.utils.base.repository import FileRepositoryBase


class CloudRepository(FileRepositoryBase[PointCloud]):
    """Point clouds in the measure format plus ``weights`` and ``provenance``.

    A plain measure file loads as a ``custom`` cloud with uniform weights.
    """

    name = "cloud"

    def to_document(self, obj: PointCloud) -> dict[str, Any]:
        return {
            "d": obj.d,
            "atoms": obj.atoms,
            "masses": obj.masses,
            "weights": obj.convention.value,
            "provenance": obj.provenance and obj.provenance.model_dump(mode="json"),
        }

    def from_document(self, document: dict[str, Any]) -> PointCloud:
        provenance = document.get("provenance")
        return PointCloud(
            d=document.get("d"),
            atoms=document["atoms"],
            masses=document["masses"],
            convention=WeightConvention(document.get("weights", WeightConvention.uniform)),
            provenance=None if provenance is None else SetSpec.model_validate(provenance),
        )
