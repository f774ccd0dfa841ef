"""Receding-horizon tracking controller for the simulated end-effector.

State: position, velocity, and the two upright-error angles with their
rates; inputs are translational acceleration and angular acceleration of
the error angles. Dynamics are exact discrete double integrators.

Every control period the controller solves a convex QP over an N-step
horizon tracking reference points that advance along the corridor
polyline at the commanded speed, subject to per-step region membership,
orientation boxes, velocity bounds (all soft, slack-relaxed), and hard
input bounds. The QP is first solved with the state constraints hard;
only when that problem is infeasible (a constraint arrived while the
state already violates it) does the slack formulation take over, with the
slack penalized quadratically so violations shrink as fast as the input
limits allow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

try:
    import clarabel
except ImportError as _err:  # pragma: no cover
    clarabel = None
    _clarabel_error = _err

from .corridor import AdmissibleSets
from .events import CostParams, InstructionEvent, KIND_MANNER

NX = 10  # p(3) v(3) e(2) edot(2)
NU = 5   # a(3) eacc(2)

DT = 0.1
HORIZON = 10
BASE_REF_SPEED = 0.15
INPUT_REG = 0.01
INPUT_SMOOTH = 0.01
V_TRACK_WEIGHT = 0.1
E_TRACK_WEIGHT = 1.0
SLACK_WEIGHT = 1e4
# small linear slack term on top of the quadratic one; the quadratic alone
# has zero gradient at zero violation, which tolerates measure-tiny
# violations wherever tracking pushes against a bound
SLACK_L1 = 10.0
HANDOFF_MARGIN = 0.05
EREF_SHRINK = 0.9
SPEED_WEIGHT_CAP = 3.0

_SQRT3 = math.sqrt(3.0)


class ControllerError(ValueError):
    pass


@dataclass(frozen=True)
class EEState:
    p: tuple[float, float, float] = (0.0, 0.0, 0.0)
    e: tuple[float, float] = (0.0, 0.0)
    v: tuple[float, float, float] = (0.0, 0.0, 0.0)
    edot: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        values = (*self.p, *self.e, *self.v, *self.edot)
        if not all(math.isfinite(x) for x in values):
            raise ControllerError(f"non-finite state {values}")

    def as_vector(self) -> np.ndarray:
        return np.array([*self.p, *self.v, *self.e, *self.edot], dtype=float)

    @classmethod
    def from_vector(cls, x) -> "EEState":
        x = np.asarray(x, dtype=float)
        return cls(
            p=tuple(x[0:3]), v=tuple(x[3:6]), e=tuple(x[6:8]), edot=tuple(x[8:10])
        )

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.v))


@dataclass(frozen=True)
class ControlInput:
    a: tuple[float, float, float] = (0.0, 0.0, 0.0)
    eacc: tuple[float, float] = (0.0, 0.0)

    def as_vector(self) -> np.ndarray:
        return np.array([*self.a, *self.eacc], dtype=float)

    @classmethod
    def from_vector(cls, u) -> "ControlInput":
        u = np.asarray(u, dtype=float)
        return cls(a=tuple(u[0:3]), eacc=tuple(u[3:5]))


def dynamics_matrices(dt: float = DT) -> tuple[np.ndarray, np.ndarray]:
    A = np.eye(NX)
    A[0:3, 3:6] = dt * np.eye(3)
    A[6:8, 8:10] = dt * np.eye(2)
    B = np.zeros((NX, NU))
    B[0:3, 0:3] = 0.5 * dt * dt * np.eye(3)
    B[3:6, 0:3] = dt * np.eye(3)
    B[6:8, 3:5] = 0.5 * dt * dt * np.eye(2)
    B[8:10, 3:5] = dt * np.eye(2)
    return A, B


def advance(state: EEState, u: ControlInput, dt: float = DT) -> EEState:
    """Exact double-integrator update under piecewise-constant input."""
    p = np.asarray(state.p) + dt * np.asarray(state.v) + 0.5 * dt * dt * np.asarray(u.a)
    v = np.asarray(state.v) + dt * np.asarray(u.a)
    e = np.asarray(state.e) + dt * np.asarray(state.edot) + 0.5 * dt * dt * np.asarray(u.eacc)
    edot = np.asarray(state.edot) + dt * np.asarray(u.eacc)
    return EEState(p=tuple(p), v=tuple(v), e=tuple(e), edot=tuple(edot))


def apply_event(params: CostParams, event: InstructionEvent) -> CostParams:
    """Merge a manner/cost update into the active cost parameters."""
    if event.cost_params is not None:
        merged = CostParams(
            speed_weight=min(event.cost_params.speed_weight, SPEED_WEIGHT_CAP),
            path_weight=event.cost_params.path_weight,
            terminal_weight=event.cost_params.terminal_weight,
        )
        return merged
    for spec in event.constraints:
        if spec.kind == KIND_MANNER and spec.speed_scale is not None:
            return params.scaled_speed(spec.speed_scale, SPEED_WEIGHT_CAP)
    return params


@dataclass(frozen=True)
class HorizonSolution:
    inputs: tuple[ControlInput, ...]
    states: tuple[EEState, ...]
    slacks: tuple[float, ...]
    cost: float
    degraded: bool = False

    @property
    def first_input(self) -> ControlInput:
        return self.inputs[0]

    @property
    def max_slack(self) -> float:
        return max(self.slacks) if self.slacks else 0.0


@dataclass
class _Problem:
    """Per-solve data: references and the active constraint rows."""

    A: np.ndarray
    B: np.ndarray
    x0: np.ndarray
    u_prev: np.ndarray      # (NU,) last applied input, tracked softly at k=0
    p_refs: np.ndarray      # (N, 3)
    v_refs: np.ndarray      # (N, 3)
    e_refs: np.ndarray      # (N, 2)
    weights: tuple[float, float, float, float, float]  # pw, vw, ew, tw, reg
    u_bounds: np.ndarray    # (NU,)
    soft_rows: list         # (step k in 1..N, coeffs (NX,), bound)
    n: int = HORIZON

    def stage_weight(self, k: int) -> tuple[float, float, float]:
        # the terminal step carries the extra lookahead weight
        pw, vw, ew, tw, _ = self.weights
        if k == self.n:
            return pw + tw, vw, ew + tw
        return pw, vw, ew


def build_problem(
    x0: EEState,
    sets: AdmissibleSets,
    params: CostParams,
    progress: float | None = None,
    dt: float = DT,
    horizon: int = HORIZON,
    u_prev: ControlInput | None = None,
) -> _Problem:
    corridor = sets.task
    limits = sets.robot
    A, B = dynamics_matrices(dt)
    s0 = corridor.progress_of(x0.p) if progress is None else progress
    v_des = BASE_REF_SPEED * params.speed_weight

    svals = [min(s0 + v_des * dt * k, corridor.length) for k in range(horizon + 1)]
    points = np.array([corridor.point_at(s) for s in svals])
    p_refs = points[1:]
    v_refs = np.diff(points, axis=0) / dt
    e_refs = np.zeros((horizon, 2))
    soft_rows: list[tuple[int, np.ndarray, float]] = []
    v_axis = limits.v_max / _SQRT3

    for k in range(1, horizon + 1):
        s_k = svals[k]
        seg = corridor.segment_index(s_k)
        bound1, bound2 = corridor.orientation_bounds[seg]
        half = np.array([bound1, bound2])
        e_refs[k - 1] = np.clip(corridor.e_ref_at(s_k), -EREF_SHRINK * half, EREF_SHRINK * half)
        for idx in corridor.active_regions(s_k, HANDOFF_MARGIN):
            region = corridor.regions[idx]
            for normal, offset in zip(region.normals, region.offsets):
                row = np.zeros(NX)
                row[0:3] = normal
                soft_rows.append((k, row, float(offset)))
        for comp, bound in ((0, bound1), (1, bound2)):
            row = np.zeros(NX)
            row[6 + comp] = 1.0
            soft_rows.append((k, row, float(bound)))
            row = np.zeros(NX)
            row[6 + comp] = -1.0
            soft_rows.append((k, row, float(bound)))
        for axis in range(3):
            row = np.zeros(NX)
            row[3 + axis] = 1.0
            soft_rows.append((k, row, v_axis))
            row = np.zeros(NX)
            row[3 + axis] = -1.0
            soft_rows.append((k, row, v_axis))
        for comp in range(2):
            row = np.zeros(NX)
            row[8 + comp] = 1.0
            soft_rows.append((k, row, limits.e_rate_max))
            row = np.zeros(NX)
            row[8 + comp] = -1.0
            soft_rows.append((k, row, limits.e_rate_max))

    a_axis = limits.a_max / _SQRT3
    u_bounds = np.array([a_axis] * 3 + [limits.e_acc_max] * 2)
    weights = (
        params.path_weight,
        V_TRACK_WEIGHT,
        E_TRACK_WEIGHT,
        params.terminal_weight,
        INPUT_REG,
    )
    return _Problem(
        A=A, B=B, x0=x0.as_vector(),
        u_prev=(u_prev.as_vector() if u_prev is not None else np.zeros(NU)),
        p_refs=p_refs, v_refs=v_refs, e_refs=e_refs,
        weights=weights, u_bounds=u_bounds, soft_rows=soft_rows, n=horizon,
    )


# --- cost in condensed input space (analytic, for checks and reporting) ------

def rollout(problem: _Problem, U: np.ndarray) -> np.ndarray:
    """States x_1..x_N from stacked inputs, exact dynamics."""
    U = U.reshape(problem.n, NU)
    states = np.zeros((problem.n, NX))
    x = problem.x0
    for k in range(problem.n):
        x = problem.A @ x + problem.B @ U[k]
        states[k] = x
    return states


def cost_value(problem: _Problem, U: np.ndarray, slack_weight: float = SLACK_WEIGHT) -> float:
    U = U.reshape(problem.n, NU)
    X = rollout(problem, U)
    pw, vw, ew, tw, reg = problem.weights
    total = 0.0
    for k in range(1, problem.n + 1):
        x = X[k - 1]
        spw, svw, sew = problem.stage_weight(k)
        total += spw * float(np.sum((x[0:3] - problem.p_refs[k - 1]) ** 2))
        total += svw * float(np.sum((x[3:6] - problem.v_refs[k - 1]) ** 2))
        total += sew * float(np.sum((x[6:8] - problem.e_refs[k - 1]) ** 2))
    total += reg * float(np.sum(U ** 2))
    total += INPUT_SMOOTH * float(np.sum((U[0] - problem.u_prev) ** 2))
    for k, row, bound in problem.soft_rows:
        violation = float(row @ X[k - 1] - bound)
        if violation > 0.0:
            total += slack_weight * violation * violation + SLACK_L1 * violation
    return total


def cost_gradient(problem: _Problem, U: np.ndarray, slack_weight: float = SLACK_WEIGHT) -> np.ndarray:
    """Analytic gradient of :func:`cost_value` by adjoint recursion."""
    U = U.reshape(problem.n, NU)
    X = rollout(problem, U)
    pw, vw, ew, tw, reg = problem.weights
    grad_x = np.zeros((problem.n, NX))
    for k in range(1, problem.n + 1):
        x = X[k - 1]
        spw, svw, sew = problem.stage_weight(k)
        g = np.zeros(NX)
        g[0:3] = 2.0 * spw * (x[0:3] - problem.p_refs[k - 1])
        g[3:6] = 2.0 * svw * (x[3:6] - problem.v_refs[k - 1])
        g[6:8] = 2.0 * sew * (x[6:8] - problem.e_refs[k - 1])
        grad_x[k - 1] = g
    for k, row, bound in problem.soft_rows:
        violation = float(row @ X[k - 1] - bound)
        if violation > 0.0:
            grad_x[k - 1] += (2.0 * slack_weight * violation + SLACK_L1) * row
    grad_u = 2.0 * reg * U.copy()
    grad_u[0] += 2.0 * INPUT_SMOOTH * (U[0] - problem.u_prev)
    lam = np.zeros(NX)
    for k in range(problem.n, 0, -1):
        lam = grad_x[k - 1] + lam
        grad_u[k - 1] += problem.B.T @ lam
        lam = problem.A.T @ lam
    return grad_u.reshape(-1)


# --- QP assembly and solve ----------------------------------------------------

def _solve_qp(problem: _Problem, with_slack: bool):
    if clarabel is None:  # pragma: no cover
        raise ControllerError(f"clarabel unavailable: {_clarabel_error}")
    n, A, B = problem.n, problem.A, problem.B
    nx, nu = NX * n, NU * n
    n_soft = len(problem.soft_rows)
    nz = nx + nu + (n_soft if with_slack else 0)
    pw, vw, ew, tw, reg = problem.weights

    P_diag = np.zeros(nz)
    q = np.zeros(nz)
    for k in range(1, n + 1):
        off = NX * (k - 1)
        spw, svw, sew = problem.stage_weight(k)
        P_diag[off:off + 3] = 2.0 * spw
        q[off:off + 3] = -2.0 * spw * problem.p_refs[k - 1]
        P_diag[off + 3:off + 6] = 2.0 * svw
        q[off + 3:off + 6] = -2.0 * svw * problem.v_refs[k - 1]
        P_diag[off + 6:off + 8] = 2.0 * sew
        q[off + 6:off + 8] = -2.0 * sew * problem.e_refs[k - 1]
    P_diag[nx:nx + nu] = 2.0 * reg
    P_diag[nx:nx + NU] += 2.0 * INPUT_SMOOTH
    q[nx:nx + NU] = -2.0 * INPUT_SMOOTH * problem.u_prev
    if with_slack:
        P_diag[nx + nu:] = 2.0 * SLACK_WEIGHT
        q[nx + nu:] = SLACK_L1
    P = sp.diags(P_diag, format="csc")

    rows, cols, vals, rhs = [], [], [], []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    r = 0
    # dynamics equalities: x_{k+1} - A x_k - B u_k = (A x0 if k == 0)
    for k in range(n):
        for i in range(NX):
            put(r + i, NX * k + i, 1.0)
        if k > 0:
            for i in range(NX):
                for j in range(NX):
                    if A[i, j] != 0.0:
                        put(r + i, NX * (k - 1) + j, -A[i, j])
        for i in range(NX):
            for j in range(NU):
                if B[i, j] != 0.0:
                    put(r + i, nx + NU * k + j, -B[i, j])
        step_rhs = A @ problem.x0 if k == 0 else np.zeros(NX)
        rhs.extend(step_rhs.tolist())
        r += NX
    n_eq = r

    # soft state rows: row . x_k (- s_i) <= bound
    for idx, (k, row, bound) in enumerate(problem.soft_rows):
        off = NX * (k - 1)
        for j in np.nonzero(row)[0]:
            put(r, off + int(j), float(row[j]))
        if with_slack:
            put(r, nx + nu + idx, -1.0)
        rhs.append(bound)
        r += 1
    # hard input box
    for k in range(n):
        for j in range(NU):
            put(r, nx + NU * k + j, 1.0)
            rhs.append(float(problem.u_bounds[j]))
            r += 1
            put(r, nx + NU * k + j, -1.0)
            rhs.append(float(problem.u_bounds[j]))
            r += 1
    # slack nonnegativity
    if with_slack:
        for idx in range(n_soft):
            put(r, nx + nu + idx, -1.0)
            rhs.append(0.0)
            r += 1

    A_mat = sp.csc_matrix((vals, (rows, cols)), shape=(r, nz))
    b_vec = np.asarray(rhs, dtype=float)
    cones = [clarabel.ZeroConeT(n_eq), clarabel.NonnegativeConeT(r - n_eq)]
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    solver = clarabel.DefaultSolver(P, q, A_mat, b_vec, cones, settings)
    solution = solver.solve()
    status = str(solution.status)
    if status not in ("Solved", "AlmostSolved"):
        return None, status
    z = np.asarray(solution.x)
    U = z[nx:nx + nu].reshape(n, NU)
    return U, status


def _measured_slacks(problem: _Problem, states: list[EEState]) -> tuple[float, ...]:
    worst = [0.0] * problem.n
    for k, row, bound in problem.soft_rows:
        value = float(row @ states[k].as_vector() - bound)
        if value > worst[k - 1]:
            worst[k - 1] = value
    return tuple(worst)


def step(
    x0: EEState,
    u0: ControlInput,
    sets: AdmissibleSets,
    params: CostParams,
    progress: float | None = None,
    fallback: HorizonSolution | None = None,
    dt: float = DT,
    horizon: int = HORIZON,
) -> HorizonSolution:
    """Solve the finite-horizon problem and return inputs plus predictions.

    Infeasible hard problems fall back to the slack formulation; solver
    failure falls back to the previous solution shifted one step (degraded
    mode) or zero inputs.
    """
    if sets is None:
        raise ControllerError("admissible sets are required")
    problem = build_problem(x0, sets, params, progress, dt, horizon, u_prev=u0)

    U, _status = _solve_qp(problem, with_slack=False)
    if U is None:
        U, _status = _solve_qp(problem, with_slack=True)
    degraded = False
    if U is None:
        degraded = True
        if fallback is not None and len(fallback.inputs) > 1:
            shifted = list(fallback.inputs[1:]) + [fallback.inputs[-1]]
            U = np.array([u.as_vector() for u in shifted])
        else:
            U = np.zeros((horizon, NU))

    inputs = tuple(ControlInput.from_vector(u) for u in U)
    states = [x0]
    for u in inputs:
        states.append(advance(states[-1], u, dt))
    slacks = _measured_slacks(problem, states)
    value = cost_value(problem, U.reshape(-1))
    return HorizonSolution(
        inputs=inputs,
        states=tuple(states),
        slacks=slacks,
        cost=value,
        degraded=degraded,
    )
