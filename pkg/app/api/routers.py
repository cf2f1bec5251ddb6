from fastapi import APIRouter
from app.api.endpoints import models, simulation, derive

api_router = APIRouter()
api_router.include_router(models.router, tags=["models"])
api_router.include_router(simulation.router, tags=["simulation"])
api_router.include_router(derive.router, tags=["derive"])
