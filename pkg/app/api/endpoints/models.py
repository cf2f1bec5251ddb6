# app/api/endpoints/models.py
from fastapi import APIRouter
from typing import Dict, List

from app.schemas.simulation import ParseRequest, ParseResponse
from app.services.model_service import get_model_source_service, list_models_service, parse_source_service

router = APIRouter()

@router.get("/models")
def list_models() -> List[Dict[str, str]]:
    return list_models_service()

@router.get("/models/{name}/source")
def get_model_source(name: str) -> Dict[str, str]:
    return get_model_source_service(name)

@router.post("/parse", response_model=ParseResponse)
def parse_source(request: ParseRequest):
    """
    Parses and load-checks model source, returning a per-class summary.
    """
    return parse_source_service(request)
