"""Free rigid body dynamics on so(n).

The state is the angular momentum matrix M, related to the angular
velocity matrix W by the inertia operator M = W J + J W for a symmetric
positive-definite J with pairwise-distinct eigenvalues. The reduced
equations of motion are dM/dt = [M, W]; attitude, when tracked, follows
dX/dt = X W.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import (
    EigenFrame,
    SkewMatrix,
    SymMatrix,
    eigen_symmetric,
    gram_project_orthonormal,
)

__all__ = [
    "InertiaSpec",
    "BodyState",
    "InvariantReport",
    "Trajectory",
    "TrajectorySample",
    "IntegrationAbort",
    "inertia_apply",
    "inertia_invert",
    "vector_field",
    "energy",
    "casimirs",
    "manakov_integrals",
    "manakov_labels",
    "casimir_labels",
    "compute_invariants",
    "step_rk4",
    "integrate",
]

DEFAULT_GAP_TOL = 1e-8

# dt * ||W||_2 above this is rejected (or warned about) by integrate().
STEP_GUARD = 0.5


class IntegrationAbort(RuntimeError):
    """Integration produced a non-finite state."""


class InertiaSpec:
    """Inertia matrix J together with its eigenframe.

    J must be symmetric positive-definite with pairwise-distinct
    eigenvalues: positivity makes every pairwise eigenvalue sum positive,
    so the momentum-to-velocity map is invertible; distinctness is what
    the equilibrium classifier relies on. Eigenvalue gaps below
    gap_tol * max(eigenvalue) are rejected as degenerate.
    """

    def __init__(self, j, gap_tol: float = DEFAULT_GAP_TOL):
        self.J = j if isinstance(j, SymMatrix) else SymMatrix(j)
        self.frame: EigenFrame = eigen_symmetric(self.J)
        lam = self.frame.eigenvalues
        if lam[0] <= 0.0:
            raise ValueError(
                f"inertia matrix must be positive definite (smallest eigenvalue {lam[0]:.3e})"
            )
        if len(lam) > 1:
            gap = float(np.diff(lam).min())
            limit = gap_tol * float(np.abs(lam).max())
            if gap < limit:
                raise ValueError(
                    f"inertia eigenvalues too close: gap {gap:.3e} below {limit:.3e}; "
                    "bodies with repeated moments are not supported"
                )
        self.gap_tol = gap_tol
        pair = lam[:, None] + lam[None, :]
        pair.flags.writeable = False
        self._pair_sums = pair

    @classmethod
    def from_eigenvalues(cls, values, gap_tol: float = DEFAULT_GAP_TOL) -> "InertiaSpec":
        return cls(SymMatrix.diagonal(values), gap_tol=gap_tol)

    @property
    def n(self) -> int:
        return self.J.n

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.frame.eigenvalues

    @property
    def basis(self) -> np.ndarray:
        return self.frame.basis

    @property
    def pair_sums(self) -> np.ndarray:
        """Matrix of pairwise eigenvalue sums lambda_i + lambda_j."""
        return self._pair_sums

    def to_eigenframe(self, a) -> np.ndarray:
        q = self.frame.basis
        return q.T @ np.asarray(a, dtype=float) @ q

    def from_eigenframe(self, a) -> np.ndarray:
        q = self.frame.basis
        return q @ np.asarray(a, dtype=float) @ q.T

    def __repr__(self):
        return f"InertiaSpec(n={self.n}, eigenvalues={self.eigenvalues.tolist()})"


def _skew_array(m) -> np.ndarray:
    if isinstance(m, SkewMatrix):
        return m.array
    return SkewMatrix(m).array


def _check_dims(arr: np.ndarray, body: InertiaSpec) -> None:
    if arr.shape[0] != body.n:
        raise ValueError(f"dimension mismatch: state is {arr.shape[0]}, body is {body.n}")


def inertia_apply(omega, body: InertiaSpec) -> SkewMatrix:
    """Momentum of an angular velocity: W J + J W."""
    w = _skew_array(omega)
    _check_dims(w, body)
    j = body.J.array
    return SkewMatrix(w @ j + j @ w)


def _invert_array(m: np.ndarray, body: InertiaSpec) -> np.ndarray:
    mt = body.to_eigenframe(m)
    ot = mt / body._pair_sums
    o = body.from_eigenframe(ot)
    return 0.5 * (o - o.T)


def inertia_invert(m, body: InertiaSpec) -> SkewMatrix:
    """Angular velocity of a momentum: entrywise division by the pairwise
    eigenvalue sums in the inertia eigenframe, rotated back."""
    arr = _skew_array(m)
    _check_dims(arr, body)
    return SkewMatrix(_invert_array(arr, body))


def _field_array(m: np.ndarray, body: InertiaSpec) -> np.ndarray:
    om = _invert_array(m, body)
    p = m @ om
    return p - p.T  # [M, W]; the transpose trick is exact for skew factors


def vector_field(m, body: InertiaSpec) -> SkewMatrix:
    """Right-hand side of the momentum equation, [M, W] with W = inverse inertia of M."""
    arr = _skew_array(m)
    _check_dims(arr, body)
    return SkewMatrix(_field_array(arr, body))


def energy(m, body: InertiaSpec) -> float:
    """Kinetic energy -tr(M W) / 4.

    The normalization makes n = 3 reduce to the familiar sum of
    (moment * rate^2) / 2 over the principal axes.
    """
    arr = _skew_array(m)
    _check_dims(arr, body)
    om = _invert_array(arr, body)
    return float(-0.25 * np.trace(arr @ om))


def casimirs(m, n_or_body) -> np.ndarray:
    """Traces of even powers tr(M^(2k)) for k = 1 .. n // 2."""
    arr = np.asarray(m, dtype=float)
    n = n_or_body.n if isinstance(n_or_body, InertiaSpec) else int(n_or_body)
    m2 = arr @ arr
    out = []
    acc = m2
    for _ in range(n // 2):
        out.append(np.trace(acc))
        acc = acc @ m2
    return np.array(out)


def casimir_labels(n: int) -> list[str]:
    return [f"casimir_{k}" for k in range(1, n // 2 + 1)]


def manakov_integrals(m, body: InertiaSpec, max_power: int) -> np.ndarray:
    """Conserved spectral coefficients of the momentum flow.

    For the matrix pencil M + z * J^2, returns the coefficient of z^j in
    tr((M + z J^2)^k) for every k = 2 .. max_power and j = 0 .. k, ordered
    by ascending k then ascending j. Every coefficient is a first integral
    of the motion.
    """
    if max_power < 2:
        raise ValueError("max_power must be at least 2")
    if max_power > body.n:
        raise ValueError(f"max_power {max_power} exceeds the dimension {body.n}")
    arr = _skew_array(m)
    _check_dims(arr, body)
    j = body.J.array
    pencil = [arr, j @ j]  # degree-1 matrix polynomial in the spectral parameter
    power = [np.eye(body.n)]
    out = []
    for k in range(1, max_power + 1):
        nxt = [np.zeros((body.n, body.n)) for _ in range(len(power) + 1)]
        for a, pa in enumerate(power):
            for b, pb in enumerate(pencil):
                nxt[a + b] = nxt[a + b] + pa @ pb
        power = nxt
        if k >= 2:
            out.extend(float(np.trace(p)) for p in power)
    return np.array(out)


def manakov_labels(max_power: int) -> list[str]:
    """Column labels matching manakov_integrals ordering."""
    return [f"manakov_{k}_{j}" for k in range(2, max_power + 1) for j in range(k + 1)]


@dataclass(frozen=True)
class InvariantReport:
    """Snapshot of the conserved quantities at one state."""

    energy: float
    casimirs: np.ndarray
    manakov: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.energy], self.casimirs, self.manakov))


def compute_invariants(m, body: InertiaSpec, max_power: int) -> InvariantReport:
    return InvariantReport(
        energy=energy(m, body),
        casimirs=casimirs(m, body.n),
        manakov=manakov_integrals(m, body, max_power),
    )


def invariant_labels(n: int, max_power: int) -> list[str]:
    return ["energy"] + casimir_labels(n) + manakov_labels(max_power)


@dataclass
class BodyState:
    """Angular momentum, optionally with the attitude matrix."""

    M: SkewMatrix
    X: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.M, SkewMatrix):
            self.M = SkewMatrix(self.M)
        if self.X is not None:
            x = np.asarray(self.X, dtype=float)
            if x.shape != (self.M.n, self.M.n):
                raise ValueError("attitude shape does not match the momentum")
            defect = np.linalg.norm(x.T @ x - np.eye(self.M.n))
            if defect > 1e-9:
                raise ValueError(f"attitude not orthonormal: defect {defect:.3e}")
            self.X = x


def step_rk4(state: BodyState, body: InertiaSpec, dt: float) -> BodyState:
    """One classical 4th-order step of the momentum equation.

    When the attitude is present it is advanced jointly (the update is a
    right multiplication by a 4th-order approximation of the step rotation)
    and then projected back onto the orthonormal matrices.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = state.M.array
    _check_dims(m, body)

    with np.errstate(over="ignore", invalid="ignore"):
        om1 = _invert_array(m, body)
        k1 = m @ om1
        k1 = k1 - k1.T
        y2 = m + (0.5 * dt) * k1
        om2 = _invert_array(y2, body)
        k2 = y2 @ om2
        k2 = k2 - k2.T
        y3 = m + (0.5 * dt) * k2
        om3 = _invert_array(y3, body)
        k3 = y3 @ om3
        k3 = k3 - k3.T
        y4 = m + dt * k3
        om4 = _invert_array(y4, body)
        k4 = y4 @ om4
        k4 = k4 - k4.T
        m_new = m + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    if not np.all(np.isfinite(m_new)):
        raise IntegrationAbort("momentum became non-finite within one step")

    x_new = None
    if state.X is not None:
        x = state.X
        l1 = x @ om1
        l2 = (x + (0.5 * dt) * l1) @ om2
        l3 = (x + (0.5 * dt) * l2) @ om3
        l4 = (x + dt * l3) @ om4
        x_new = x + (dt / 6.0) * (l1 + 2.0 * (l2 + l3) + l4)
        if not np.all(np.isfinite(x_new)):
            raise IntegrationAbort("attitude became non-finite within one step")
        x_new = gram_project_orthonormal(x_new)
    return BodyState(M=SkewMatrix(m_new), X=x_new)


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: BodyState
    invariants: InvariantReport


@dataclass
class Trajectory:
    """Uniformly sampled trajectory with per-sample invariant reports.

    step is the integration step; samples are spaced step * record_every
    apart in time.
    """

    samples: list[TrajectorySample]
    step: float
    record_every: int = 1
    integrator: str = "rk4"
    manakov_max_power: int = 2

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def momentum_displacement(self) -> float:
        """Max over samples of ||M(t) - M(0)|| / ||M(0)|| (absolute if M(0) = 0)."""
        m0 = self.samples[0].state.M.array
        scale = np.linalg.norm(m0)
        worst = max(np.linalg.norm(s.state.M.array - m0) for s in self.samples)
        return float(worst / scale) if scale > 0 else float(worst)

    def drift_summary(self) -> dict[str, float]:
        """Max relative drift |f(t) - f(0)| / max(1, |f(0)|) per invariant."""
        n = self.samples[0].state.M.n
        labels = invariant_labels(n, self.manakov_max_power)
        table = np.stack([s.invariants.as_vector() for s in self.samples])
        f0 = table[0]
        drift = np.abs(table - f0).max(axis=0) / np.maximum(1.0, np.abs(f0))
        out = {label: float(d) for label, d in zip(labels, drift)}
        out["momentum_displacement"] = self.momentum_displacement()
        return out


def integrate(state, body: InertiaSpec, dt: float, t_end: float,
              record_every: int = 1, *, manakov_max_power: int | None = None,
              guard: str = "reject", prefer_numba: bool = True) -> Trajectory:
    """Fixed-step RK4 integration of the momentum equation.

    state may be a BodyState or anything accepted by SkewMatrix. Samples
    (with invariant reports) are recorded every `record_every` steps, which
    must divide the total step count round(t_end / dt). Steps with
    dt * ||W(0)||_2 above 0.5 are rejected (guard="reject") or allowed
    with a warning (guard="warn").

    Momentum-only integration runs in the inertia eigenframe through a
    compiled kernel; with an attitude present the plain stepper is used.
    """
    if not isinstance(state, BodyState):
        state = BodyState(M=state if isinstance(state, SkewMatrix) else SkewMatrix(state))
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if record_every < 1:
        raise ValueError("record_every must be a positive integer")
    nsteps = int(round(t_end / dt))
    if nsteps < 1:
        raise ValueError("t_end shorter than one step")
    if abs(nsteps * dt - t_end) > 1e-6 * dt:
        raise ValueError(
            f"t_end={t_end} is not an integer multiple of dt={dt}"
        )
    if nsteps % record_every != 0:
        raise ValueError(
            f"record_every={record_every} must divide the step count {nsteps}"
        )
    if guard not in ("reject", "warn"):
        raise ValueError("guard must be 'reject' or 'warn'")

    m0 = state.M.array
    _check_dims(m0, body)
    om0 = _invert_array(m0, body)
    speed = float(np.linalg.norm(om0, 2))
    if dt * speed > STEP_GUARD:
        msg = (
            f"dt * ||W|| = {dt * speed:.3f} exceeds the stability guard {STEP_GUARD}; "
            "reduce dt"
        )
        if guard == "reject":
            raise IntegrationAbort(msg)
        warnings.warn(msg)

    if manakov_max_power is None:
        manakov_max_power = max(2, min(body.n, 4))

    if state.X is None:
        mt0 = body.to_eigenframe(m0)
        rec = _kernels.rk4_momentum(mt0, np.asarray(body._pair_sums), dt,
                                    nsteps, record_every, prefer_numba=prefer_numba)
        samples = []
        for r in range(rec.shape[0]):
            t = r * record_every * dt
            if not np.all(np.isfinite(rec[r])):
                raise IntegrationAbort(f"momentum became non-finite near t = {t:.6g}")
            m = body.from_eigenframe(rec[r])
            st = BodyState(M=SkewMatrix(m))
            samples.append(TrajectorySample(
                t=t, state=st,
                invariants=compute_invariants(st.M, body, manakov_max_power),
            ))
    else:
        samples = [TrajectorySample(
            t=0.0, state=state,
            invariants=compute_invariants(state.M, body, manakov_max_power),
        )]
        cur = state
        for s in range(nsteps):
            cur = step_rk4(cur, body, dt)
            if (s + 1) % record_every == 0:
                samples.append(TrajectorySample(
                    t=(s + 1) * dt, state=cur,
                    invariants=compute_invariants(cur.M, body, manakov_max_power),
                ))
    return Trajectory(samples=samples, step=dt, record_every=record_every,
                      integrator="rk4", manakov_max_power=manakov_max_power)
