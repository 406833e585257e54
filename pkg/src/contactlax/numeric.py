"""Compile evolution-form PDE systems to vectorized grid evaluators and
integrate them at desk scale.

Spatial derivatives are spectral (FFT) or 2nd-order centered differences
on a periodic unit box; time stepping is fixed-step RK4.  Monitors track
the minimum pole distance (the published systems degenerate where pole
locations collide, so runs abort on proximity), the largest field
magnitude, and a lagged finite-difference residual of the evolution
equations' original (x, y, z, t) form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .compat import PDESystem, CK_INDEPENDENTS
from .jetalg import (
    DiffPoly,
    JetQuotient,
    JetVariable,
    linear_coefficient,
)


class CompileError(RuntimeError):
    pass


class PoleProximityError(RuntimeError):
    def __init__(self, step, dist, guard):
        super().__init__(f"pole proximity at step {step}: min distance {dist:.3e} < guard {guard:.3e}")
        self.step, self.dist, self.guard = step, dist, guard


class NumericAbortError(RuntimeError):
    pass


# -- grids and derivative operators -------------------------------------------


@dataclass
class Grid:
    shape: tuple[int, int, int]
    lengths: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if any(n < 8 for n in self.shape):
            raise CompileError("grid must have at least 8 points per direction")

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(l / n for l, n in zip(self.lengths, self.shape))

    def coords(self):
        axes = [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)


def spectral_diff(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    n = arr.shape[axis]
    k = np.fft.fftfreq(n, d=h)
    shape = [1, 1, 1]
    shape[axis] = n
    mult = (2j * np.pi * k).reshape(shape)
    return np.real(np.fft.ifft(np.fft.fft(arr, axis=axis) * mult, axis=axis))


def fd2_diff(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2.0 * h)


SPATIAL_OPS = {"spectral": spectral_diff, "fd2": fd2_diff}


def spatial_jet(arr: np.ndarray, didx: tuple[int, int, int, int], grid: Grid, op) -> np.ndarray:
    if didx[3] != 0:
        raise CompileError("cannot form a T-jet from a single snapshot")
    out = arr
    for axis, count in ((0, didx[0]), (1, didx[1]), (2, didx[2])):
        for _ in range(count):
            out = op(out, axis, grid.spacing[axis])
    return out


# -- compiled evaluation programs ----------------------------------------------


@dataclass(frozen=True)
class TermProgram:
    """Flattened sum-of-products program: each entry is a coefficient and
    (field name, multi-index, power) factors, evaluated left to right."""

    terms: tuple[tuple[float, tuple[tuple[str, tuple, int], ...]], ...]

    def eval(self, jets: dict) -> np.ndarray | float:
        acc = None
        for coeff, factors in self.terms:
            val = coeff
            for name, didx, power in factors:
                arr = jets[(name, didx)]
                val = val * (arr if power == 1 else arr ** power)
            acc = val if acc is None else acc + val
        return 0.0 if acc is None else acc


@dataclass(frozen=True)
class QuotientProgram:
    num: TermProgram
    den: TermProgram | None

    def eval(self, jets: dict):
        n = self.num.eval(jets)
        if self.den is None:
            return n
        return n / self.den.eval(jets)


def _compile_poly(e: DiffPoly) -> TermProgram:
    terms = []
    for coeff, factors in e.monomials():
        terms.append(
            (float(coeff), tuple((jv.field.name, jv.d, p) for jv, p in factors))
        )
    return TermProgram(tuple(terms))


def _compile_quotient(q: JetQuotient) -> QuotientProgram:
    if q.den.is_const():
        c = q.den.const_value()
        num = _compile_poly(q.num * (Fraction(1) / c))
        return QuotientProgram(num, None)
    return QuotientProgram(_compile_poly(q.num), _compile_poly(q.den))


# -- symbolic solve for the T-jets ----------------------------------------------


def _solve_linear(mat, rhs):
    """Gaussian elimination over the jet-quotient field (small systems)."""
    k = len(rhs)
    m = [row[:] for row in mat]
    b = rhs[:]
    perm = list(range(k))
    for col in range(k):
        piv = next((r for r in range(col, k) if not m[r][col].is_zero()), None)
        if piv is None:
            raise CompileError("T-jet matrix is symbolically singular")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            b[col], b[piv] = b[piv], b[col]
        inv = m[col][col]
        for r in range(k):
            if r == col or m[r][col].is_zero():
                continue
            f = m[r][col] / inv
            m[r] = [a - f * c for a, c in zip(m[r], m[col])]
            b[r] = b[r] - f * b[col]
    return [b[i] / m[i][i] for i in range(k)]


@dataclass(frozen=True)
class CompiledSystem:
    unknowns: tuple[str, ...]
    programs: dict  # unknown name -> QuotientProgram for its T-derivative
    rhs_exact: dict  # unknown name -> JetQuotient (the exact solved form)
    required_jets: tuple[tuple[str, tuple], ...]
    pole_pairs: tuple[tuple[str, str], ...]
    source: PDESystem

    def rhs_from_jets(self, jets: dict) -> dict:
        return {u: self.programs[u].eval(jets) for u in self.unknowns}


def compile_system(sys: PDESystem) -> CompiledSystem:
    """Solve an evolution-form system for the first-order T-jets and
    flatten the right-hand sides into array programs."""
    if tuple(sys.independents) != CK_INDEPENDENTS:
        raise CompileError("system must be in evolution form (X, Y, Z, T independents)")
    if len(sys.equations) != len(sys.unknowns):
        raise CompileError("need exactly one equation per unknown")
    t_jets = [JetVariable(u, (0, 0, 0, 1)) for u in sys.unknowns]
    mat, rhs = [], []
    for eq in sys.equations:
        for tj in t_jets:
            if tj in eq.den.jet_variables():
                raise CompileError("T-jet in a denominator")
        row = []
        rest = eq.num
        for tj in t_jets:
            c, rest = linear_coefficient(rest, tj)
            row.append(JetQuotient(c, eq.den))
        mat.append(row)
        rhs.append(JetQuotient(-rest, eq.den))
    solved = _solve_linear(mat, rhs)
    programs, rhs_exact, required = {}, {}, set()
    for u, expr in zip(sys.unknowns, solved):
        for jv in expr.jet_variables():
            if jv.d[3] != 0:
                raise CompileError("solved right-hand side still contains a T-jet")
            if jv.field.role == "independent":
                raise CompileError("independent-variable symbols are not grid data")
            required.add((jv.field.name, jv.d))
        programs[u.name] = _compile_quotient(expr)
        rhs_exact[u.name] = expr
    vs, ws = sys.provenance.get("pole_fields", ((), ()))
    pairs = tuple((v.name, w.name) for v in vs for w in ws)
    return CompiledSystem(
        tuple(u.name for u in sys.unknowns),
        programs,
        rhs_exact,
        tuple(sorted(required)),
        pairs,
        sys,
    )


# -- manufactured (harmonic) fields ----------------------------------------------


@dataclass(frozen=True)
class Mode:
    k: tuple[int, int, int]
    amp: float
    phase: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class HarmonicField:
    """mean + sum of travelling cosine modes; every jet is closed-form."""

    mean: float
    modes: tuple[Mode, ...] = ()

    def jet(self, didx: tuple[int, int, int, int], coords, T: float):
        X, Y, Z = coords
        order = sum(didx)
        total = 0.0 if order else self.mean
        for md in self.modes:
            theta = 2 * np.pi * (md.k[0] * X + md.k[1] * Y + md.k[2] * Z) + md.phase - md.omega * T
            coef = md.amp
            for ax in range(3):
                coef *= (2 * np.pi * md.k[ax]) ** didx[ax]
            coef *= (-md.omega) ** didx[3]
            total = total + coef * np.cos(theta + order * np.pi / 2)
        return total if isinstance(total, np.ndarray) else np.asarray(total)

    def value(self, coords, T: float):
        return self.jet((0, 0, 0, 0), coords, T)


def exact_jets(fields: dict, required, coords, T: float) -> dict:
    jets = {}
    for name, didx in required:
        jets[(name, didx)] = fields[name].jet(didx, coords, T)
    return jets


# -- integration -------------------------------------------------------------------


@dataclass
class Trajectory:
    times: list
    snapshots: list  # dict name -> ndarray, copied
    monitors: list   # rows: (step, T, min_pole_dist, residual_L2, max_field)
    grid: Grid
    spatial: str


def _grid_jets(state: dict, cs: CompiledSystem, grid: Grid, op) -> dict:
    jets = {}
    for name, didx in cs.required_jets:
        arr = state[name]
        jets[(name, didx)] = arr if didx == (0, 0, 0, 0) else spatial_jet(arr, didx, grid, op)
    return jets


def _min_pole_distance(state: dict, pairs) -> float:
    if not pairs:
        return math.inf
    return min(float(np.min(np.abs(state[w] - state[v]))) for v, w in pairs)


def integrate(
    cs: CompiledSystem,
    grid: Grid,
    state: dict,
    steps: int,
    dt: float,
    spatial: str = "spectral",
    guard: float = 0.1,
    forcing=None,
    monitor_every: int = 1,
    t0: float = 0.0,
) -> Trajectory:
    """Method-of-lines advance in T.  ``forcing`` maps (coords, T) to a
    dict of arrays added to the T-derivatives (manufactured runs)."""
    op = SPATIAL_OPS[spatial]
    coords = grid.coords()
    state = {k: np.array(v, dtype=float) for k, v in state.items()}

    def rhs(st, T):
        vals = cs.rhs_from_jets(_grid_jets(st, cs, grid, op))
        if forcing is not None:
            g = forcing(coords, T)
            vals = {u: vals[u] + g[u] for u in vals}
        return vals

    traj = Trajectory([t0], [{k: v.copy() for k, v in state.items()}], [], grid, spatial)
    dist = _min_pole_distance(state, cs.pole_pairs)
    if dist < guard:
        raise PoleProximityError(0, dist, guard)
    traj.monitors.append((0, t0, dist, float("nan"), _max_field(state)))
    T = t0
    for step in range(1, steps + 1):
        k1 = rhs(state, T)
        s2 = {u: state[u] + 0.5 * dt * k1[u] for u in cs.unknowns}
        k2 = rhs(s2, T + 0.5 * dt)
        s3 = {u: state[u] + 0.5 * dt * k2[u] for u in cs.unknowns}
        k3 = rhs(s3, T + 0.5 * dt)
        s4 = {u: state[u] + dt * k3[u] for u in cs.unknowns}
        k4 = rhs(s4, T + dt)
        state = {
            u: state[u] + (dt / 6.0) * (k1[u] + 2 * k2[u] + 2 * k3[u] + k4[u])
            for u in cs.unknowns
        }
        T += dt
        if step % monitor_every == 0 or step == steps:
            for u in cs.unknowns:
                if not np.all(np.isfinite(state[u])):
                    raise NumericAbortError(f"non-finite values in {u} at step {step}")
            dist = _min_pole_distance(state, cs.pole_pairs)
            if dist < guard:
                raise PoleProximityError(step, dist, guard)
            traj.times.append(T)
            traj.snapshots.append({k: v.copy() for k, v in state.items()})
            res = residual_original_form(cs, traj, when=-2) if len(traj.snapshots) >= 3 else float("nan")
            traj.monitors.append((step, T, dist, res, _max_field(state)))
    return traj


def _max_field(state: dict) -> float:
    return max(float(np.max(np.abs(a))) for a in state.values())


def write_monitor_csv(traj: Trajectory, path: str):
    with open(path, "w") as f:
        f.write("step,T,min_pole_dist,residual_L2,max_field\n")
        for row in traj.monitors:
            f.write(",".join(repr(x) for x in row) + "\n")


# -- residual of the original-form equations ---------------------------------------


def residual_original_form(cs: CompiledSystem, traj: Trajectory, when: int = -2, spatial: str = "fd2") -> float:
    """Evaluate the untransformed (x, y, z, t) equations on the evolved
    trajectory: T-derivatives by centered differences across snapshots,
    y/t jets reassembled from them (d/dy = d/dT + d/dY, d/dt = d/dT -
    d/dY), spatial jets by the chosen operator.  Returns the root of the
    mean square over all equations and grid points."""
    source = cs.source.provenance.get("original_system")
    if source is None:
        raise CompileError("no original-form system recorded for residual evaluation")
    idx = when if when >= 0 else len(traj.snapshots) + when
    if idx < 1 or idx > len(traj.snapshots) - 2:
        raise CompileError("need snapshots on both sides for the T-difference")
    op = SPATIAL_OPS[spatial]
    grid = traj.grid
    dt = traj.times[idx + 1] - traj.times[idx]
    prev, cur, nxt = traj.snapshots[idx - 1], traj.snapshots[idx], traj.snapshots[idx + 1]
    jets = {}
    for eq in source.equations:
        for jv in set(eq.num.jet_variables()) | set(eq.den.jet_variables()):
            key = (jv.field.name, jv.d)
            if key in jets:
                continue
            name = jv.field.name
            nx, ny, nz, nt = jv.d
            if ny + nt == 0:
                jets[key] = spatial_jet(cur[name], jv.d, grid, op)
                continue
            if ny + nt > 1 or nx or nz:
                raise CompileError("residual evaluation expects first-order y/t jets")
            u_T = (nxt[name] - prev[name]) / (2.0 * dt)
            u_Y = spatial_jet(cur[name], (0, 1, 0, 0), grid, op)
            jets[key] = u_T + u_Y if ny else u_T - u_Y
    total, count = 0.0, 0
    for eq in source.equations:
        prog = _compile_quotient(JetQuotient(eq.num, eq.den))
        r = prog.eval(jets)
        total += float(np.sum(np.asarray(r) ** 2))
        count += np.asarray(r).size
    return math.sqrt(total / count)


# -- initial data -----------------------------------------------------------------


def load_initial_data(spec: dict | str, unknowns, coords) -> dict:
    """Initial-data description: each unknown maps to either
    {"constant": value} or {"fourier": {"mean": c, "modes": [{"k":
    [kx,ky,kz], "amp": a, "phase": p}]}}."""
    if isinstance(spec, str):
        with open(spec) as f:
            spec = json.load(f)
    shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
    out = {}
    for u in unknowns:
        name = u if isinstance(u, str) else u.name
        if name not in spec:
            raise CompileError(f"initial data missing for {name}")
        entry = spec[name]
        if "constant" in entry:
            hf = HarmonicField(float(entry["constant"]))
        elif "fourier" in entry:
            fz = entry["fourier"]
            modes = tuple(
                Mode(tuple(m["k"]), float(m["amp"]), float(m.get("phase", 0.0)))
                for m in fz.get("modes", ())
            )
            hf = HarmonicField(float(fz.get("mean", 0.0)), modes)
        else:
            raise CompileError(f"bad initial-data entry for {name}")
        arr = hf.value(coords, 0.0)
        out[name] = np.broadcast_to(np.asarray(arr, dtype=float), shape).copy()
    return out


# -- manufactured-solution studies ---------------------------------------------------


def make_forcing(cs: CompiledSystem, exact: dict):
    """Forcing that turns the manufactured fields into an exact solution:
    g = u_T(exact) - R(exact jets), all jets analytic."""

    def forcing(coords, T):
        jets = exact_jets(exact, cs.required_jets, coords, T)
        vals = cs.rhs_from_jets(jets)
        out = {}
        for u in cs.unknowns:
            out[u] = exact[u].jet((0, 0, 0, 1), coords, T) - vals[u]
        return out

    return forcing


def _error_vs_exact(traj: Trajectory, exact: dict, coords) -> float:
    T = traj.times[-1]
    state = traj.snapshots[-1]
    total, count = 0.0, 0
    for u, hf in exact.items():
        diff = state[u] - hf.value(coords, T)
        total += float(np.sum(diff ** 2))
        count += diff.size
    return math.sqrt(total / count)


@dataclass
class ConvergenceReport:
    temporal_errors: list
    temporal_orders: list
    spatial_errors: list
    spatial_orders: list


def manufactured_test(
    cs: CompiledSystem,
    exact: dict,
    t_final: float = 0.2,
    temporal_grid: int = 16,
    temporal_dts=(0.04, 0.02, 0.01, 0.005),
    spatial_grids=(16, 32),
    spatial_dt: float = 0.002,
    guard: float = 0.1,
):
    """Temporal study: spectral space (exact for band-limited data), RK4
    under dt-refinement.  Spatial study: FD2 at fixed small dt across
    grid refinement.  Reports observed orders."""
    temporal_errors = []
    for dt in temporal_dts:
        grid = Grid((temporal_grid,) * 3)
        coords = grid.coords()
        state = {u: exact[u].value(coords, 0.0) + np.zeros(grid.shape) for u in cs.unknowns}
        steps = round(t_final / dt)
        traj = integrate(
            cs, grid, state, steps, dt, spatial="spectral", guard=guard,
            forcing=make_forcing(cs, exact), monitor_every=max(1, steps // 4),
        )
        temporal_errors.append(_error_vs_exact(traj, exact, coords))
    temporal_orders = [
        math.log2(a / b) for a, b in zip(temporal_errors, temporal_errors[1:]) if b > 0
    ]
    spatial_errors = []
    for ng in spatial_grids:
        grid = Grid((ng,) * 3)
        coords = grid.coords()
        state = {u: exact[u].value(coords, 0.0) + np.zeros(grid.shape) for u in cs.unknowns}
        steps = max(4, round(0.02 / spatial_dt))
        traj = integrate(
            cs, grid, state, steps, spatial_dt, spatial="fd2", guard=guard,
            forcing=make_forcing(cs, exact), monitor_every=steps,
        )
        spatial_errors.append(_error_vs_exact(traj, exact, coords))
    spatial_orders = [
        math.log2(a / b) for a, b in zip(spatial_errors, spatial_errors[1:]) if b > 0
    ]
    return ConvergenceReport(temporal_errors, temporal_orders, spatial_errors, spatial_orders)


def residual_refinement_study(
    cs: CompiledSystem,
    init: dict,
    levels=((8, 0.02), (16, 0.01), (32, 0.005)),
    steps0: int = 6,
    guard: float = 0.1,
) -> list[float]:
    """Evolve the same smooth initial data at joint (grid, step)
    refinement and report the original-form finite-difference residual at
    a fixed interior time; it must shrink under refinement."""
    out = []
    for i, (ng, dt) in enumerate(levels):
        steps = steps0 * 2 ** i
        grid = Grid((ng,) * 3)
        coords = grid.coords()
        state = {u: init[u].value(coords, 0.0) + np.zeros(grid.shape) for u in cs.unknowns}
        traj = integrate(cs, grid, state, steps, dt, spatial="spectral", guard=guard, monitor_every=1)
        out.append(residual_original_form(cs, traj, when=len(traj.snapshots) // 2))
    return out
