# app/services/simulation.py
import io
import json
import math
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.config.settings import get_precision
from app.schemas.ast import Model
from app.schemas.simulation import SimConfig
from app.services.errors import EvalError, NumericError, RuntimeModelError, SimulationError
from app.services.interpreter import (
    ObjectInstance, Program, StatementFailure, Value, instantiate, is_real, slot_name, split_path, step,
)

logger = logging.getLogger(__name__)

# Relative slack so that end_time/dt landing a rounding error above an integer
# does not add a step.
_STEP_SLACK = 1e-9


def step_count(end_time: float, dt: float) -> int:
    return max(0, math.ceil(end_time / dt - _STEP_SLACK))


def default_recorded(root: ObjectInstance) -> List[str]:
    """Every Real, Bool and Vector slot of the root object, in declaration order."""
    columns = []
    for (name, order), value in root.store.items():
        if isinstance(value, (bool, np.bool_)) or is_real(value) or (
            isinstance(value, np.ndarray) and value.ndim == 1
        ):
            columns.append(slot_name(name, order))
    return columns


def _reader(root: ObjectInstance, path: str) -> Callable[[], Value]:
    names, order = split_path(path)
    owner = root.resolve_owner(names, path)
    slot = (names[-1], order)
    if slot not in owner.store:
        raise EvalError(f"cannot record '{path}': no such variable")
    store = owner.store
    return lambda: store[slot]


def _snapshot(value: Value) -> Value:
    if isinstance(value, np.ndarray):
        return value.copy()
    if isinstance(value, np.bool_):
        return bool(value)
    if is_real(value):
        return float(value)
    return value


@dataclass
class Trace:
    """Recorded values per step: rows of (time, values) aligned with `columns`."""

    columns: List[str]
    rows: List[Tuple[float, List[Value]]] = field(default_factory=list)

    @property
    def times(self) -> List[float]:
        return [t for t, _ in self.rows]

    def column(self, path: str) -> List[Value]:
        index = self.columns.index(path)
        return [values[index] for _, values in self.rows]

    def final(self, path: str) -> Value:
        return self.rows[-1][1][self.columns.index(path)]

    def _flat_columns(self) -> List[str]:
        if not self.rows:
            return list(self.columns)
        names = []
        for column, value in zip(self.columns, self.rows[0][1]):
            if isinstance(value, np.ndarray) and value.ndim == 1:
                names += [f"{column}.{i}" for i in range(value.shape[0])]
            elif isinstance(value, np.ndarray):
                names += [f"{column}.{i}.{j}" for i in range(value.shape[0]) for j in range(value.shape[1])]
            else:
                names.append(column)
        return names

    def to_frame(self) -> pd.DataFrame:
        """One row per step; vectors and matrices expand into one column per component."""
        records = []
        for t, values in self.rows:
            flat: List[Any] = [t]
            for value in values:
                if isinstance(value, np.ndarray):
                    flat += [float(x) for x in value.ravel()]
                elif isinstance(value, bool):
                    flat.append(1.0 if value else 0.0)
                else:
                    flat.append(value)
            records.append(flat)
        return pd.DataFrame(records, columns=["time"] + self._flat_columns())

    def to_csv(self, precision: Optional[int] = None) -> str:
        digits = precision or get_precision()
        buffer = io.StringIO()
        self.to_frame().to_csv(buffer, index=False, float_format=f"%.{digits}g", lineterminator="\n")
        return buffer.getvalue()

    def to_jsonl(self, precision: Optional[int] = None) -> str:
        digits = precision or get_precision()

        def encode(value: Value) -> Any:
            if isinstance(value, np.ndarray):
                return [encode(float(x)) if value.ndim == 1 else [encode(float(y)) for y in x] for x in value]
            if isinstance(value, bool) or isinstance(value, str):
                return value
            if digits >= 17:
                return float(value)
            return float(f"{value:.{digits}g}")

        lines = []
        for t, values in self.rows:
            record = {"t": encode(t)}
            record.update({column: encode(value) for column, value in zip(self.columns, values)})
            lines.append(json.dumps(record))
        return "\n".join(lines) + ("\n" if lines else "")


def read_trace_csv(text: str) -> pd.DataFrame:
    """Parses CSV written by Trace.to_csv back into a frame, reals round-tripping exactly."""
    return pd.read_csv(io.StringIO(text), float_precision="round_trip")


def simulate(model: Model, entry: str, args: Sequence[Any] = (), config: Optional[SimConfig] = None) -> Trace:
    """
    Instantiates `entry` and steps it ceil(end_time/dt) times, recording the
    requested paths at t = 0 and after every step.
    """
    config = config or SimConfig()
    program = Program(model)
    root = instantiate(program, entry, args, overrides=config.overrides)

    columns = list(config.recorded) if config.recorded else default_recorded(root)
    readers = [_reader(root, path) for path in columns]
    trace = Trace(columns)

    def record(t: float) -> None:
        trace.rows.append((t, [_snapshot(read()) for read in readers]))

    steps = step_count(config.end_time, config.dt)
    logger.info(f"Simulating {entry} for {steps} steps (dt={config.dt}, {len(columns)} columns)")
    record(0.0)
    for k in range(1, steps + 1):
        time = (k - 1) * config.dt
        try:
            step(root, config.dt)
        except StatementFailure as failure:
            raise SimulationError(failure.error, k, time, failure.statement)
        except (RuntimeModelError, NumericError) as e:
            raise SimulationError(e, k, time)
        record(k * config.dt)
    return trace
