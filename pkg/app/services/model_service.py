# app/services/model_service.py
import logging
from typing import Any, Dict, List

import numpy as np
from fastapi import HTTPException

from app.config.settings import BUILTIN_MODELS
from app.schemas.ast import Continuous, Model
from app.schemas.derive import DeriveRequest, DeriveResponse
from app.schemas.simulation import (
    ClassSummary, ParseRequest, ParseResponse, SimulateRequest, TraceResponse, TraceRow,
)
from app.services.errors import HybridLangError, LagrangianSpecError, LangError, UnknownModel
from app.services.interpreter import evaluate_constant
from app.services.lagrangian import emit_explicit_source, euler_lagrange, parse_lagrangian_spec
from app.services.model_checks import walk_statements
from app.services.model_library import builtin_source, library_system
from app.services.parser import parse_expression, parse_model
from app.services.simulation import Trace, simulate
from app.services.symbolic import to_source

logger = logging.getLogger(__name__)


def _http_error(e: HybridLangError) -> HTTPException:
    if isinstance(e, UnknownModel):
        return HTTPException(status_code=404, detail=e.message)
    if isinstance(e, (LangError, LagrangianSpecError)):
        return HTTPException(status_code=422, detail=str(e))
    return HTTPException(status_code=400, detail=str(e))


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, str):
        return value
    return float(value)


def _summarize(model: Model) -> ParseResponse:
    return ParseResponse(classes=[
        ClassSummary(
            name=cls.name,
            params=list(cls.params),
            private_inits=len(cls.private_inits),
            statements=len(cls.body),
            continuous=sum(isinstance(s, Continuous) for s in walk_statements(cls.body)),
        )
        for cls in model.classes
    ])


def _trace_response(entry: str, trace: Trace) -> TraceResponse:
    return TraceResponse(
        entry=entry,
        columns=trace.columns,
        rows=[TraceRow(t=t, values=[_jsonable(v) for v in values]) for t, values in trace.rows],
    )


def list_models_service() -> List[Dict[str, str]]:
    return [{"name": name, "description": description} for name, description in BUILTIN_MODELS.items()]


def get_model_source_service(name: str) -> Dict[str, str]:
    try:
        return {"name": name, "source": builtin_source(name)}
    except HybridLangError as e:
        raise _http_error(e)


def parse_source_service(request: ParseRequest) -> ParseResponse:
    try:
        return _summarize(parse_model(request.source))
    except HybridLangError as e:
        logger.info(f"Rejected model source: {e}")
        raise _http_error(e)


def simulate_service(request: SimulateRequest) -> TraceResponse:
    if (request.source is None) == (request.builtin is None):
        raise HTTPException(status_code=422, detail="Provide exactly one of 'source' or 'builtin'.")
    try:
        source = request.source if request.source is not None else builtin_source(request.builtin)
        model = parse_model(source)
        args = [evaluate_constant(parse_expression(text)) for text in request.args]
        trace = simulate(model, request.entry, args, request.config)
    except HybridLangError as e:
        logger.warning(f"Simulation of {request.entry} failed: {e}")
        raise _http_error(e)
    return _trace_response(request.entry, trace)


def derive_service(request: DeriveRequest) -> DeriveResponse:
    if (request.spec is None) == (request.builtin is None):
        raise HTTPException(status_code=422, detail="Provide exactly one of 'spec' or 'builtin'.")
    try:
        system = (parse_lagrangian_spec(request.spec) if request.spec is not None
                  else library_system(request.builtin))
        eom = euler_lagrange(system)
        source = emit_explicit_source(system, request.class_name, eom=eom) if request.emit else None
    except HybridLangError as e:
        logger.warning(f"Derivation failed: {e}")
        raise _http_error(e)
    return DeriveResponse(
        name=system.name,
        coords=list(system.coords),
        residuals=[to_source(r) for r in eom.residuals],
        mass_matrix=[[to_source(entry) for entry in row] for row in eom.mass_matrix],
        bias=[to_source(c) for c in eom.bias],
        source=source,
    )
