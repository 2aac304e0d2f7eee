"""Stability probes for stationary rotations.

Three views of an equilibrium momentum: the spectrum of the linearized
flow, the kernel of the first-order equilibrium-residual map along orbit
directions (an excess kernel beyond the stabilizer certifies that the
equilibrium is not isolated on its orbit), and a direct perturbation
experiment watching the deviation grow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .body import InertiaSpec, _invert_array, _skew_array, _check_dims
from .equilibria import DEFAULT_TOL, NotAnEquilibrium, is_equilibrium

__all__ = [
    "LinearizationReport",
    "OrbitKernelReport",
    "ProbeResult",
    "so_basis_pairs",
    "skew_to_vec",
    "vec_to_skew",
    "linearize",
    "linearize_fd",
    "orbit_kernel",
    "orbit_kernel_directions",
    "stabilizer_dimension",
    "instability_probe",
]

DEFAULT_RANK_TOL = 1e-8


def so_basis_pairs(n: int) -> list[tuple[int, int]]:
    """Lexicographic index pairs (i < j) of the orthonormal so(n) basis."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def skew_to_vec(m) -> np.ndarray:
    """Coordinates in the basis (E_ij - E_ji) / sqrt(2): an isometry for
    the Frobenius inner product."""
    arr = np.asarray(m, dtype=float)
    n = arr.shape[0]
    iu = np.triu_indices(n, k=1)
    return np.sqrt(2.0) * arr[iu]


def vec_to_skew(c, n: int) -> np.ndarray:
    vec = np.asarray(c, dtype=float)
    out = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    out[iu] = vec / np.sqrt(2.0)
    return out - out.T


def _sorted_spectrum(eigs: np.ndarray) -> np.ndarray:
    order = np.lexsort((-eigs.imag, -eigs.real))
    return eigs[order]


@dataclass(frozen=True)
class LinearizationReport:
    """Linearized momentum flow at an equilibrium, as an operator on so(n)
    in the orthonormal basis (E_ij - E_ji)/sqrt(2), pairs lexicographic."""

    dim: int
    matrix: np.ndarray
    spectrum: np.ndarray
    max_real_part: float


@dataclass(frozen=True)
class OrbitKernelReport:
    """Rank data of the first-order equilibrium-residual map along orbit
    directions. kernel_dim counts singular values at most
    rank_tol * sigma_max."""

    map_rank: int
    kernel_dim: int
    singular_values: np.ndarray
    rank_tol: float


def _require_equilibrium(m_eq, body: InertiaSpec, tol: float):
    ok, residual = is_equilibrium(m_eq, body, tol)
    if not ok:
        raise NotAnEquilibrium(
            f"momentum is not stationary (residual {residual:.3e} > tol {tol:.1e})",
            residual,
        )


def _linearization_matrix(m: np.ndarray, body: InertiaSpec) -> np.ndarray:
    """Exact directional derivative dM -> [dM, W] + [M, Jinv(dM)],
    assembled column by column over the so(n) basis."""
    n = body.n
    om = _invert_array(m, body)
    pairs = so_basis_pairs(n)
    dim = len(pairs)
    mat = np.empty((dim, dim))
    for k, (i, j) in enumerate(pairs):
        e = np.zeros((n, n))
        e[i, j] = 1.0 / np.sqrt(2.0)
        e[j, i] = -e[i, j]
        d_om = _invert_array(e, body)
        df = (e @ om - om @ e) + (m @ d_om - d_om @ m)
        mat[:, k] = skew_to_vec(df)
    return mat


def linearize(m_eq, body: InertiaSpec, tol: float = DEFAULT_TOL) -> LinearizationReport:
    """Spectrum of the linearized flow at a stationary momentum."""
    arr = _skew_array(m_eq)
    _check_dims(arr, body)
    _require_equilibrium(arr, body, tol)
    mat = _linearization_matrix(arr, body)
    eigs = _sorted_spectrum(np.linalg.eigvals(mat))
    return LinearizationReport(
        dim=mat.shape[0],
        matrix=mat,
        spectrum=eigs,
        max_real_part=float(eigs.real.max()) if eigs.size else 0.0,
    )


def linearize_fd(m_eq, body: InertiaSpec, h: float | None = None) -> np.ndarray:
    """Central finite differences of the momentum field over the so(n)
    basis; cross-check for the analytic linearization."""
    from .body import _field_array

    arr = _skew_array(m_eq)
    _check_dims(arr, body)
    if h is None:
        scale = np.linalg.norm(arr)
        h = 1e-6 * scale if scale > 0 else 1e-6
    n = body.n
    pairs = so_basis_pairs(n)
    dim = len(pairs)
    mat = np.empty((dim, dim))
    for k, (i, j) in enumerate(pairs):
        e = np.zeros((n, n))
        e[i, j] = 1.0 / np.sqrt(2.0)
        e[j, i] = -e[i, j]
        fp = _field_array(arr + h * e, body)
        fm = _field_array(arr - h * e, body)
        mat[:, k] = skew_to_vec((fp - fm) / (2.0 * h))
    return mat


def _ad_matrix(m: np.ndarray, n: int) -> np.ndarray:
    """Matrix of xi -> [xi, m] over the so(n) basis."""
    pairs = so_basis_pairs(n)
    dim = len(pairs)
    mat = np.empty((dim, dim))
    for k, (i, j) in enumerate(pairs):
        e = np.zeros((n, n))
        e[i, j] = 1.0 / np.sqrt(2.0)
        e[j, i] = -e[i, j]
        mat[:, k] = skew_to_vec(e @ m - m @ e)
    return mat


def _orbit_map(m: np.ndarray, body: InertiaSpec) -> np.ndarray:
    return _linearization_matrix(m, body) @ _ad_matrix(m, body.n)


def orbit_kernel(m_eq, body: InertiaSpec, rank_tol: float = DEFAULT_RANK_TOL,
                 tol: float = DEFAULT_TOL) -> OrbitKernelReport:
    """Kernel of xi -> D(field)(M) [xi, M] at a stationary momentum.

    The kernel always contains the stabilizer of M; any excess direction
    moves M along its orbit while preserving stationarity to first order,
    certifying a positive-dimensional set of equilibria on the orbit.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    arr = _skew_array(m_eq)
    _check_dims(arr, body)
    _require_equilibrium(arr, body, tol)
    k = _orbit_map(arr, body)
    svals = np.linalg.svd(k, compute_uv=False)
    smax = float(svals[0]) if svals.size else 0.0
    dim = k.shape[0]
    if smax == 0.0:
        kernel_dim = dim
    else:
        kernel_dim = int(np.sum(svals <= rank_tol * smax))
    return OrbitKernelReport(
        map_rank=dim - kernel_dim,
        kernel_dim=kernel_dim,
        singular_values=svals,
        rank_tol=rank_tol,
    )


def orbit_kernel_directions(m_eq, body: InertiaSpec,
                            rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the orbit-kernel, as so(n) vectors."""
    arr = _skew_array(m_eq)
    k = _orbit_map(arr, body)
    u, svals, vt = np.linalg.svd(k)
    smax = svals[0] if svals.size else 0.0
    if smax == 0.0:
        return np.eye(k.shape[0])
    keep = svals <= rank_tol * smax
    return vt[keep].T


def stabilizer_dimension(m, n: int, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Dimension of {xi in so(n) : [xi, m] = 0}."""
    arr = np.asarray(m, dtype=float)
    ad = _ad_matrix(arr, n)
    svals = np.linalg.svd(ad, compute_uv=False)
    smax = svals[0] if svals.size else 0.0
    if smax == 0.0:
        return ad.shape[0]
    return int(np.sum(svals <= rank_tol * smax))


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of a perturbation-growth experiment."""

    escaped: bool
    exit_time: float | None
    times: np.ndarray
    deviations: np.ndarray


def _unit_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    out[iu] = rng.standard_normal(iu[0].size)
    out = out - out.T
    return out / np.linalg.norm(out)


def instability_probe(m_eq, body: InertiaSpec, eps: float, horizon: float,
                      exit_factor: float, *, seed: int = 0, dt: float = 1e-2,
                      record_every: int | None = None) -> ProbeResult:
    """Integrate from a seeded random perturbation of size eps and watch
    the deviation ||M(t) - M_eq||.

    escaped is True when the deviation reaches exit_factor * eps before
    the horizon; integration stops at the first crossing. The deviation
    curve is recorded every record_every steps (default: about every 0.1
    time units).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if exit_factor <= 1:
        raise ValueError("exit_factor must exceed 1")
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    arr = _skew_array(m_eq)
    _check_dims(arr, body)
    rng = np.random.default_rng(seed)
    m0 = arr + eps * _unit_skew(body.n, rng)

    if record_every is None:
        record_every = max(1, int(round(0.1 / dt)))
    total = int(round(horizon / dt))
    threshold = exit_factor * eps

    meq_t = body.to_eigenframe(arr)
    m_t = body.to_eigenframe(m0)
    pair = np.asarray(body.pair_sums)

    times = [0.0]
    devs = [float(np.linalg.norm(m_t - meq_t))]
    escaped = False
    exit_time = None
    done = 0
    chunk_records = 32
    while done < total and not escaped:
        nsteps = min(chunk_records * record_every, total - done)
        nsteps -= nsteps % record_every
        if nsteps == 0:
            break
        rec = _kernels.rk4_momentum(m_t, pair, dt, nsteps, record_every)
        for r in range(1, rec.shape[0]):
            t = (done + r * record_every) * dt
            sample = rec[r]
            if not np.all(np.isfinite(sample)):
                escaped = True
                exit_time = t
                break
            dev = float(np.linalg.norm(sample - meq_t))
            times.append(t)
            devs.append(dev)
            if dev >= threshold:
                escaped = True
                exit_time = t
                break
        m_t = rec[-1]
        done += nsteps
    return ProbeResult(
        escaped=escaped,
        exit_time=exit_time,
        times=np.array(times),
        deviations=np.array(devs),
    )
