# tests/test_simulation.py
import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from app.schemas.simulation import SimConfig
from app.services.errors import EvalError, SimulationError, UnsupportedConstruct
from app.services.parser import parse_model
from app.services.quadcopter import quadcopter_args
from app.services.simulation import read_trace_csv, simulate, step_count

G = 9.81


def pendulum_oracle(times, length=1.0):
    def rhs(t, y):
        return [y[1], G / length * math.cos(y[0])]
    solution = solve_ivp(rhs, (0.0, times[-1]), [0.0, 0.0], method="DOP853",
                         t_eval=times, rtol=1e-12, atol=1e-12)
    return solution.y[0]


def pendulum_error(model, dt, end_time):
    trace = simulate(model, "pendulum", [1.0], SimConfig(dt=dt, end_time=end_time, recorded=["theta"]))
    reference = pendulum_oracle(np.array(trace.times))
    return float(np.max(np.abs(np.array(trace.column("theta")) - reference)))


def test_step_count_tolerates_rounding():
    assert step_count(1.0, 0.1) == 10
    assert step_count(0.3, 0.1) == 3
    assert step_count(0.25, 0.1) == 3
    assert step_count(0.0, 0.1) == 0


def test_rows_are_recorded_at_multiples_of_dt(pendulum_model):
    trace = simulate(pendulum_model, "pendulum", [1.0], SimConfig(dt=0.1, end_time=1.0))
    assert len(trace.rows) == 11
    assert trace.times[3] == 3 * 0.1
    assert trace.columns == ["l", "theta", "theta'", "theta''", "g"]


def test_zero_end_time_records_initial_state_only(pendulum_model):
    trace = simulate(pendulum_model, "pendulum", [1.0], SimConfig(dt=0.1, end_time=0.0))
    assert trace.times == [0.0]


def test_pendulum_first_step_is_explicit_euler(pendulum_model):
    trace = simulate(pendulum_model, "pendulum", [2.0],
                     SimConfig(dt=0.01, end_time=0.02, recorded=["theta", "theta'"]))
    assert trace.rows[1][1] == [0.0, pytest.approx(G / 2.0 * 0.01)]
    assert trace.rows[2][1][0] == pytest.approx(G / 2.0 * 0.01 * 0.01)


def test_pendulum_matches_reference_with_first_order_error(pendulum_model):
    coarse = pendulum_error(pendulum_model, 1e-3, 0.5)
    fine = pendulum_error(pendulum_model, 5e-4, 0.5)
    assert coarse <= 5e-3
    assert 1.6 <= coarse / fine <= 2.4


@pytest.mark.parametrize("fixture, entry, args", [
    ("pendulum_model", "pendulum", [1.0]),
    ("double_pendulum_model", "double_pendulum", [1.0, 1.0, 1.0, 1.0]),
    ("quadcopter_model", "QuadCopter", quadcopter_args()),
])
def test_listings_run_for_five_seconds(request, fixture, entry, args):
    model = request.getfixturevalue(fixture)
    trace = simulate(model, entry, args, SimConfig(dt=1e-3, end_time=5.0))
    assert len(trace.rows) == 5001
    assert all(np.all(np.isfinite(np.asarray(v, dtype=float))) for v in trace.rows[-1][1])


def test_double_pendulum_first_step_from_rest(double_pendulum_model):
    trace = simulate(double_pendulum_model, "double_pendulum", [1.0, 1.0, 1.0, 1.0],
                     SimConfig(dt=1e-3, end_time=1e-3, recorded=["t_1''", "t_2''"]))
    first, second = trace.rows[1][1]
    assert first == pytest.approx(-G, abs=1e-12)
    assert abs(second) <= 1e-12


def test_identical_runs_produce_identical_traces(double_pendulum_model):
    config = SimConfig(dt=1e-3, end_time=1.0, overrides={"t_1": 0.4, "t_2": -0.7})
    first = simulate(double_pendulum_model, "double_pendulum", [1.0, 2.0, 1.5, 0.5], config)
    second = simulate(double_pendulum_model, "double_pendulum", [1.0, 2.0, 1.5, 0.5], config)
    assert first.to_csv() == second.to_csv()
    assert first.to_jsonl() == second.to_jsonl()


def test_quadcopter_free_falls_without_thrust(quadcopter_model):
    trace = simulate(quadcopter_model, "QuadCopter", quadcopter_args(),
                     SimConfig(dt=1e-3, end_time=0.001, recorded=["P''"]))
    assert np.allclose(trace.final("P''"), [0.0, 0.0, -G])


def test_runtime_error_reports_step_and_statement():
    model = parse_model("class A () private x := 0; x' := 1; y := 0 end x' = 1; y = 1 / (2 - x) end")
    with pytest.raises(SimulationError) as info:
        simulate(model, "A", [], SimConfig(dt=0.5, end_time=5.0))
    error = info.value
    assert error.step_index == 5
    assert error.time == 2.0
    assert error.statement == "y = 1 / (2 - x)"
    assert "division by zero" in str(error)


def test_terminate_is_unsupported():
    model = parse_model("""
class C () private end end
class A () private c := create C() end terminate c end
""")
    with pytest.raises(SimulationError) as info:
        simulate(model, "A", [], SimConfig(dt=0.1, end_time=0.1))
    assert isinstance(info.value.cause, UnsupportedConstruct)


def test_unknown_recorded_path_is_rejected(pendulum_model):
    with pytest.raises(EvalError):
        simulate(pendulum_model, "pendulum", [1.0], SimConfig(dt=0.1, end_time=0.1, recorded=["phi"]))


def test_csv_round_trips_reals_exactly(pendulum_model):
    trace = simulate(pendulum_model, "pendulum", [1.0],
                     SimConfig(dt=0.001, end_time=0.01, recorded=["theta", "theta'"]))
    frame = read_trace_csv(trace.to_csv())
    assert list(frame.columns) == ["time", "theta", "theta'"]
    assert frame["theta'"].tolist() == trace.column("theta'")


def test_csv_expands_vectors_and_bools():
    model = parse_model("class A () private v := [1, 2]; on := true end end")
    text = simulate(model, "A", [], SimConfig(dt=1.0, end_time=1.0)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "time,v.0,v.1,on"
    assert lines[1] == "0,1,2,1"


def test_precision_env_var_controls_printed_digits(monkeypatch, pendulum_model):
    monkeypatch.setenv("HYBRIDLANG_PRECISION", "3")
    trace = simulate(pendulum_model, "pendulum", [3.0],
                     SimConfig(dt=0.001, end_time=0.001, recorded=["theta'"]))
    assert trace.to_csv().splitlines()[-1] == "0.001,0.00327"


def test_jsonl_keeps_vectors_as_lists():
    model = parse_model("class A () private v := [1, 2] end end")
    lines = simulate(model, "A", [], SimConfig(dt=1.0, end_time=1.0)).to_jsonl().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0]) == {"t": 0.0, "v": [1.0, 2.0]}
