# app/api/endpoints/simulation.py
import logging
from fastapi import APIRouter

from app.schemas.simulation import SimulateRequest, TraceResponse
from app.services.model_service import simulate_service

logger = logging.getLogger(__name__)

router = APIRouter()

@router.post("/simulate", response_model=TraceResponse)
def simulate_model(request: SimulateRequest):
    logger.info(f"Simulate request for entry {request.entry} (builtin={request.builtin})")
    return simulate_service(request)
