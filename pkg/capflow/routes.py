from capflow.core.capacity.api import router as capacity_router
from capflow.core.measures.api import router as measures_router
from capflow.core.sets.api import router as sets_router
from capflow.core.symmetrization.api import router as symmetrization_router
from capflow.utils.base.router import CommandRouter

root_router = CommandRouter()
root_router.include_router(sets_router)
root_router.include_router(symmetrization_router)
root_router.include_router(measures_router)
root_router.include_router(capacity_router)
