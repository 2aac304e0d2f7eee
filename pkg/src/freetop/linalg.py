"""Dense linear algebra for small symmetric and skew-symmetric matrices.

Everything is double precision and deterministic: fixed iteration orders,
fixed sign conventions, no randomized algorithms. Dimensions are expected
to stay small (n up to a few dozen); there is no sparse or blocked path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymMatrix",
    "SkewMatrix",
    "EigenFrame",
    "Plane",
    "PlaneDecomposition",
    "commutator",
    "eigen_symmetric",
    "canonical_planes",
    "frobenius_norm",
    "gram_project_orthonormal",
]

# Relative structural defect tolerated when ingesting nearly symmetric /
# nearly skew arrays; storage is exact after ingestion.
STRUCTURE_TOL = 1e-9

_EPS = np.finfo(float).eps


def _as_square(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class _StructuredMatrix:
    """Shared storage for SymMatrix / SkewMatrix.

    The invariant entries[j, i] == sign * entries[i, j] holds exactly:
    construction projects onto the structured part (after checking the
    input is structured up to `tol`), and item assignment writes both
    mirror entries.
    """

    __slots__ = ("_a",)
    _sign: float  # +1.0 symmetric, -1.0 skew

    def __init__(self, entries, tol: float = STRUCTURE_TOL):
        arr = _as_square(entries)
        defect = np.linalg.norm(arr - self._sign * arr.T)
        scale = max(1.0, np.linalg.norm(arr))
        if defect > tol * scale:
            kind = "symmetric" if self._sign > 0 else "skew-symmetric"
            raise ValueError(
                f"matrix is not {kind}: structural defect {defect:.3e} "
                f"exceeds {tol:.1e} * {scale:.3e}"
            )
        sym = 0.5 * (arr + self._sign * arr.T)
        if self._sign < 0:
            np.fill_diagonal(sym, 0.0)
        self._a = sym

    @classmethod
    def zeros(cls, n: int):
        if n < 1:
            raise ValueError("dimension must be positive")
        obj = cls.__new__(cls)
        obj._a = np.zeros((n, n))
        return obj

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the underlying storage (no copy)."""
        v = self._a.view()
        return _readonly(v)

    def to_array(self) -> np.ndarray:
        return self._a.copy()

    def __array__(self, dtype=None, copy=None):
        out = self._a.copy()
        return out if dtype is None else out.astype(dtype)

    def __getitem__(self, idx):
        return self._a[idx]

    def __setitem__(self, idx, value):
        i, j = idx
        v = float(value)
        if not np.isfinite(v):
            raise ValueError("matrix entries must be finite")
        if self._sign < 0 and i == j and v != 0.0:
            raise ValueError("diagonal of a skew-symmetric matrix is zero")
        self._a[i, j] = v
        self._a[j, i] = self._sign * v

    def copy(self):
        obj = type(self).__new__(type(self))
        obj._a = self._a.copy()
        return obj

    def norm(self) -> float:
        return float(np.linalg.norm(self._a))

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.all(self._a == other._a))

    __hash__ = None

    def __repr__(self):
        kind = type(self).__name__
        return f"{kind}(n={self.n})\n{self._a!r}"


class SymMatrix(_StructuredMatrix):
    """Real symmetric matrix with structurally enforced symmetry."""

    _sign = 1.0

    @classmethod
    def diagonal(cls, values) -> "SymMatrix":
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("expected a nonempty 1-d list of diagonal values")
        return cls(np.diag(vals))


class SkewMatrix(_StructuredMatrix):
    """Real skew-symmetric matrix with structurally enforced antisymmetry."""

    _sign = -1.0

    @classmethod
    def rotation_generator(cls, n: int, i: int, j: int, omega: float = 1.0) -> "SkewMatrix":
        """Generator of a rotation in the (i, j) coordinate plane.

        The (i, j) entry is +omega, so exp(t * G) rotates e_j toward e_i.
        """
        if i == j:
            raise ValueError("plane axes must differ")
        g = cls.zeros(n)
        g[i, j] = omega
        return g


@dataclass(frozen=True)
class EigenFrame:
    """Orthonormal eigenbasis of a symmetric matrix.

    eigenvalues are ascending; basis columns are the matching eigenvectors,
    each with its first non-negligible component positive.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        q = np.asarray(self.basis, dtype=float)
        n = q.shape[0]
        if q.shape != (n, n) or lam.shape != (n,):
            raise ValueError("inconsistent eigenframe shapes")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be ascending")
        defect = np.linalg.norm(q.T @ q - np.eye(n))
        if defect > 1e-12 * n:
            raise ValueError(f"basis not orthonormal: defect {defect:.3e}")
        object.__setattr__(self, "eigenvalues", _readonly(lam.copy()))
        object.__setattr__(self, "basis", _readonly(q.copy()))

    @property
    def n(self) -> int:
        return self.basis.shape[0]


def commutator(a, b) -> np.ndarray:
    """Matrix commutator a @ b - b @ a.

    Returns the raw product matrix; callers assert structure (the result
    is skew when both arguments are skew or both are symmetric).
    """
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    if aa.shape != bb.shape or aa.ndim != 2 or aa.shape[0] != aa.shape[1]:
        raise ValueError(f"dimension mismatch: {aa.shape} vs {bb.shape}")
    return aa @ bb - bb @ aa


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def _fix_column_signs(q: np.ndarray) -> None:
    """Flip columns so the first component larger than 1e-12 is positive."""
    n = q.shape[0]
    for k in range(q.shape[1]):
        for i in range(n):
            if abs(q[i, k]) > 1e-12:
                if q[i, k] < 0:
                    q[:, k] = -q[:, k]
                break


def eigen_symmetric(s, max_sweeps: int = 64) -> EigenFrame:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Deterministic: fixed sweep order (row-major over the strict upper
    triangle), eigenvalues sorted ascending with a stable sort, eigenvector
    signs fixed by the first non-negligible component.

    Raises ArithmeticError if the off-diagonal mass has not converged
    after `max_sweeps` sweeps.
    """
    src = np.asarray(s, dtype=float) if not isinstance(s, SymMatrix) else s.array
    a = SymMatrix(src).to_array()  # validates symmetry, copies
    n = a.shape[0]
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if norm > 0.0:
        stop = n * _EPS * norm
        skip = 0.1 * _EPS * norm
        for _ in range(max_sweeps):
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            if off <= stop:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if abs(apq) <= skip:
                        continue
                    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                    c = 1.0 / np.hypot(1.0, t)
                    sn = t * c
                    # A <- G^T A G with the rotation acting on rows/cols p, q.
                    cp = a[:, p].copy()
                    cq = a[:, q].copy()
                    a[:, p] = c * cp - sn * cq
                    a[:, q] = sn * cp + c * cq
                    rp = a[p, :].copy()
                    rq = a[q, :].copy()
                    a[p, :] = c * rp - sn * rq
                    a[q, :] = sn * rp + c * rq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - sn * vq
                    v[:, q] = sn * vp + c * vq
        else:
            raise ArithmeticError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                "(degenerate or ill-scaled input)"
            )
    lam = np.diag(a).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = v[:, order]
    _fix_column_signs(v)
    frame = EigenFrame(eigenvalues=lam, basis=v)
    resid = np.linalg.norm(v @ np.diag(lam) @ v.T - src)
    if norm > 0.0 and resid > 1e-10 * norm:
        raise ArithmeticError(f"eigendecomposition residual {resid:.3e} too large")
    return frame


@dataclass(frozen=True)
class Plane:
    """Invariant rotation plane: w acts on span(u, v) as omega * (u v^T - v u^T)."""

    omega: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _readonly(np.asarray(self.u, dtype=float).copy()))
        object.__setattr__(self, "v", _readonly(np.asarray(self.v, dtype=float).copy()))
        if self.omega <= 0:
            raise ValueError("plane frequency must be positive")


@dataclass(frozen=True)
class PlaneDecomposition:
    """Splitting of R^n into rotation planes plus a fixed subspace.

    planes: the invariant two-dimensional planes of a skew operator with
    their rotation rates. fixed_subspace: n x k matrix whose orthonormal
    columns span the kernel. 2 * len(planes) + k == n.
    """

    planes: tuple
    fixed_subspace: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "fixed_subspace",
            _readonly(np.asarray(self.fixed_subspace, dtype=float).copy()),
        )

    @property
    def n(self) -> int:
        return self.fixed_subspace.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Sum of omega * (u v^T - v u^T) over all planes."""
        n = self.n
        w = np.zeros((n, n))
        for p in self.planes:
            w += p.omega * (np.outer(p.u, p.v) - np.outer(p.v, p.u))
        return w


def _orthogonalize(x: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Two-pass modified Gram-Schmidt of x against an orthonormal list."""
    y = x.copy()
    for _ in range(2):
        for b in basis:
            y -= np.dot(b, y) * b
    return y


def canonical_planes(w, tol: float = 1e-9) -> PlaneDecomposition:
    """Canonical form of a skew-symmetric operator.

    Splits R^n into invariant rotation planes with positive rates plus the
    fixed subspace. Directions with singular value at most tol * ||w||_F
    count as fixed; since the spectrum comes from the symmetric square
    -w @ w, singular values below about sqrt(eps) * ||w|| are not
    resolvable and the kernel cut never drops below that floor. Plane
    rates themselves are measured from the action of w directly and are
    accurate to rounding.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    warr = np.asarray(w, dtype=float) if not isinstance(w, SkewMatrix) else w.array
    warr = SkewMatrix(warr).to_array()
    n = warr.shape[0]
    norm_w = np.linalg.norm(warr)
    if norm_w == 0.0:
        return PlaneDecomposition(planes=(), fixed_subspace=np.eye(n))

    s = -warr @ warr
    s = 0.5 * (s + s.T)
    frame = eigen_symmetric(s)
    mu = frame.eigenvalues
    vecs = frame.basis
    sigma = np.sqrt(np.clip(mu, 0.0, None))
    kernel_cut = max(tol, 8.0 * np.sqrt(n * _EPS)) * norm_w

    # Cluster the non-kernel eigenvalues of -w^2, descending. Exact pairs
    # split only by rounding, so the merge window sits just above the
    # backward-error floor of the Jacobi sweep.
    order = np.argsort(-mu, kind="stable")
    atol = 64.0 * n * _EPS * max(mu.max(), 0.0)
    clusters: list[list[int]] = []
    for idx in order:
        if sigma[idx] <= kernel_cut:
            continue
        if clusters:
            rep = mu[clusters[-1][0]]
            if rep - mu[idx] <= max(atol, 1e-10 * rep):
                clusters[-1].append(idx)
                continue
        clusters.append([idx])

    planes: list[Plane] = []
    claimed: list[np.ndarray] = []
    for cluster in clusters:
        if len(cluster) % 2 != 0:
            raise ArithmeticError(
                "odd-dimensional rotation eigenspace: kernel tolerance "
                "splits a frequency pair"
            )
        cols = [vecs[:, i].copy() for i in cluster]
        for _ in range(len(cluster) // 2):
            # Pick the candidate least covered by already-claimed planes;
            # a residual of at least 1/sqrt(m) is guaranteed to exist.
            resids = [_orthogonalize(c, claimed) for c in cols]
            norms = [np.linalg.norm(r) for r in resids]
            best = int(np.argmax(norms))
            a = resids[best] / norms[best]
            wa = warr @ a
            omega = np.linalg.norm(wa)
            b = _orthogonalize(wa, claimed + [a])
            b /= np.linalg.norm(b)
            # w a = omega b, w b = -omega a; stored so that the plane
            # contributes omega * (u v^T - v u^T) with (u, v) = (b, a).
            planes.append(Plane(omega=float(omega), u=b, v=a))
            claimed.extend([a, b])

    fixed_cols = []
    for idx in range(n):
        if sigma[idx] <= kernel_cut:
            y = _orthogonalize(vecs[:, idx].copy(), claimed + fixed_cols)
            ny = np.linalg.norm(y)
            if ny > 0.5:
                fixed_cols.append(y / ny)
    fixed = np.column_stack(fixed_cols) if fixed_cols else np.zeros((n, 0))
    if 2 * len(planes) + fixed.shape[1] != n:
        raise ArithmeticError("plane extraction lost dimensions")
    return PlaneDecomposition(planes=tuple(planes), fixed_subspace=fixed)


def gram_project_orthonormal(x) -> np.ndarray:
    """Nearest orthonormal matrix (polar factor) of a square matrix.

    Raises numpy.linalg.LinAlgError for (numerically) singular input,
    where the nearest orthonormal matrix is not unique.
    """
    arr = _as_square(x)
    u, s, vt = np.linalg.svd(arr)
    if s[-1] <= 1e-12 * s[0] or s[0] == 0.0:
        raise np.linalg.LinAlgError("singular input: polar factor not unique")
    q = u @ vt
    defect = np.linalg.norm(q.T @ q - np.eye(arr.shape[0]))
    if defect > 1e-12 * arr.shape[0]:
        raise ArithmeticError(f"projection failed, orthogonality defect {defect:.3e}")
    return q
