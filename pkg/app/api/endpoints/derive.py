# app/api/endpoints/derive.py
from fastapi import APIRouter

from app.schemas.derive import DeriveRequest, DeriveResponse
from app.services.model_service import derive_service

router = APIRouter()

@router.post("/derive", response_model=DeriveResponse)
def derive_equations(request: DeriveRequest):
    """
    Euler-Lagrange equations of a Lagrangian spec or library system,
    optionally with emitted model source.
    """
    return derive_service(request)
