import numpy as np
import pytest

from contactlax.compat import ck_transform, derive
from contactlax.jetalg import FieldId, JetVariable, evaluate
from contactlax.numeric import (
    CompileError,
    Grid,
    HarmonicField,
    Mode,
    NumericAbortError,
    PoleProximityError,
    compile_system,
    fd2_diff,
    integrate,
    load_initial_data,
    make_forcing,
    manufactured_test,
    residual_refinement_study,
    spectral_diff,
    write_monitor_csv,
)
from contactlax.sampling import random_point

TP = 2 * np.pi


@pytest.fixture(scope="module")
def cs():
    return compile_system(ck_transform(derive("rat", 1, 1, form="residues")))


def constant_state(grid, values=(-1.0, 1.0, 1.0, 0.5)):
    names = ("v1", "w1", "a1", "b1")
    return {nm: np.full(grid.shape, val) for nm, val in zip(names, values)}


def test_derivative_operators_on_one_mode():
    grid = Grid((16, 16, 16))
    X, Y, Z = grid.coords()
    f = np.cos(TP * X) + 0 * Y + 0 * Z
    exact = -TP * np.sin(TP * X) + 0 * Y + 0 * Z
    sp = spectral_diff(np.broadcast_to(f, (16, 16, 16)).copy(), 0, grid.spacing[0])
    assert np.max(np.abs(sp - exact)) < 1e-10
    fd = fd2_diff(np.broadcast_to(f, (16, 16, 16)).copy(), 0, grid.spacing[0])
    # centered-difference truncation for the 2*pi mode at N=16 is ~0.16
    assert 0.05 < np.max(np.abs(fd - exact)) < 0.3


def test_compiled_matches_exact_eval(cs, rng):
    pairs = [(JetVariable(FieldId("v1")), JetVariable(FieldId("w1")))]
    for _ in range(10):
        jvs = set()
        for expr in cs.rhs_exact.values():
            jvs.update(expr.jet_variables())
        pt = random_point(jvs, rng, pole_pairs=pairs)
        jets = {(jv.field.name, jv.d): float(pt[jv]) for jv in jvs}
        for u in cs.unknowns:
            exact = float(evaluate(cs.rhs_exact[u], pt))
            got = cs.programs[u].eval(jets)
            assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact))


def test_constants_are_equilibria(cs):
    grid = Grid((16, 16, 16))
    state = constant_state(grid)
    traj = integrate(cs, grid, state, 100, 0.01, monitor_every=50)
    drift = max(float(np.max(np.abs(traj.snapshots[-1][u] - state[u]))) for u in cs.unknowns)
    assert drift <= 1e-13


def test_pole_guard_aborts(cs):
    grid = Grid((16, 16, 16))
    state = constant_state(grid, (-1.0, -0.95, 1.0, 0.5))
    with pytest.raises(PoleProximityError):
        integrate(cs, grid, state, 10, 0.01, guard=0.1)


def test_nan_aborts(cs):
    grid = Grid((16, 16, 16))
    state = constant_state(grid)
    state["a1"][0, 0, 0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises((NumericAbortError, PoleProximityError)):
        integrate(cs, grid, state, 2, 0.01)


def test_zero_forcing_constant_fields_zero_error(cs):
    const = {
        u: HarmonicField(c) for u, c in zip(("v1", "w1", "a1", "b1"), (-1.0, 1.0, 1.0, 0.5))
    }
    grid = Grid((8, 8, 8))
    coords = grid.coords()
    state = {u: const[u].value(coords, 0.0) + np.zeros(grid.shape) for u in cs.unknowns}
    traj = integrate(cs, grid, state, 10, 0.01, forcing=make_forcing(cs, const), monitor_every=10)
    err = max(float(np.max(np.abs(traj.snapshots[-1][u] - state[u]))) for u in cs.unknowns)
    assert err == 0.0


def test_manufactured_orders_smoke(cs):
    exact = {
        "v1": HarmonicField(-1.0, (Mode((1, 0, 1), 0.05, 0.3, TP * 0.7),)),
        "w1": HarmonicField(1.0, (Mode((0, 1, 1), 0.05, 1.1, TP * 0.5),)),
        "a1": HarmonicField(1.0, (Mode((1, 1, 0), 0.05, 2.0, TP * 0.6),)),
        "b1": HarmonicField(0.7, (Mode((1, 0, 0), 0.05, 0.9, TP * 0.8),)),
    }
    rep = manufactured_test(
        cs, exact, t_final=0.1, temporal_grid=8, temporal_dts=(0.025, 0.0125),
        spatial_grids=(8, 16), spatial_dt=0.0025,
    )
    assert all(3.0 < o < 5.0 for o in rep.temporal_orders), rep.temporal_orders
    assert all(1.4 < o < 2.6 for o in rep.spatial_orders), rep.spatial_orders


def test_residual_refinement_two_levels(cs):
    init = {
        "v1": HarmonicField(-1.0, (Mode((1, 0, 1), 0.1, 0.3),)),
        "w1": HarmonicField(1.0, (Mode((0, 1, 1), 0.1, 1.1),)),
        "a1": HarmonicField(1.0, (Mode((1, 1, 0), 0.1, 2.0),)),
        "b1": HarmonicField(0.7, (Mode((1, 0, 0), 0.1, 0.9),)),
    }
    res = residual_refinement_study(cs, init, levels=((8, 0.02), (16, 0.01)), steps0=6)
    assert res[0] > res[1] > 0


def test_initial_data_loader(cs):
    grid = Grid((8, 8, 8))
    coords = grid.coords()
    spec = {
        "v1": {"constant": -1.0},
        "w1": {"fourier": {"mean": 1.0, "modes": [{"k": [1, 0, 0], "amp": 0.1, "phase": 0.5}]}},
        "a1": {"constant": 1.0},
        "b1": {"constant": 0.5},
    }
    state = load_initial_data(spec, cs.unknowns, coords)
    assert state["v1"].shape == grid.shape
    assert np.allclose(np.mean(state["w1"]), 1.0, atol=1e-12)
    assert np.max(state["w1"]) > 1.05
    with pytest.raises(CompileError):
        load_initial_data({"v1": {"constant": 0}}, cs.unknowns, coords)


def test_monitor_csv(tmp_path, cs):
    grid = Grid((8, 8, 8))
    traj = integrate(cs, grid, constant_state(grid), 6, 0.01, monitor_every=2)
    out = tmp_path / "mon.csv"
    write_monitor_csv(traj, str(out))
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "step,T,min_pole_dist,residual_L2,max_field"
    assert len(lines) >= 4


def test_compile_rejects_wrong_independents():
    sys = derive("rat", 1, 1, form="residues")
    with pytest.raises(CompileError):
        compile_system(sys)
