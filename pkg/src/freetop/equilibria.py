"""Stationary rotations of the free n-dimensional body.

A momentum M is stationary exactly when the square of its angular
velocity commutes with the inertia matrix. In the inertia eigenframe
every stationary W is block-diagonal: for each distinct rotation rate
w_i an even-sized block w_i * A_i where A_i is an orthogonal skew matrix
with A_i^2 = -I (a complex structure), plus a zero block on the fixed
axes. An equilibrium is *regular* when every A_i is a signed permutation
matrix, i.e. the rotation planes are spanned by principal axes; otherwise
it is *exotic*. Exotic equilibria require a repeated rotation rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body import InertiaSpec, inertia_apply, _invert_array, _skew_array, _check_dims
from .linalg import SkewMatrix

__all__ = [
    "ClassificationError",
    "NotAnEquilibrium",
    "OddBlock",
    "AmbiguousClustering",
    "ComplexStructure",
    "FrequencyBlock",
    "EquilibriumStructure",
    "RecipeBlock",
    "GeneratorRecipe",
    "is_equilibrium",
    "classify",
    "build_omega",
    "build_momentum",
    "random_complex_structure",
    "generate",
]

DEFAULT_TOL = 1e-9
DEFAULT_CLUSTER_TOL = 1e-6

# Entries of a block structure are snapped to {0, +1, -1} within this
# tolerance when deciding regular vs exotic.
SIGNED_PERM_TOL = 1e-8

# Type-level tolerance on A^T A = I and A^2 = -I.
STRUCTURE_DEFECT_TOL = 1e-10


class ClassificationError(Exception):
    """Base class for classification failures."""


class NotAnEquilibrium(ClassificationError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class OddBlock(ClassificationError):
    """A frequency group with an odd number of axes.

    Impossible for a true stationary rotation (nonzero rates pair up);
    signals misconfigured tolerances.
    """


class AmbiguousClustering(ClassificationError):
    """Two rotation rates closer than cluster_tol but farther than tol."""


class ComplexStructure:
    """Orthogonal skew matrix squaring to minus the identity.

    Exists only in even dimensions; the m = 1 case has exactly two
    elements (the quarter-turn and its inverse).
    """

    def __init__(self, a):
        self.A = a if isinstance(a, SkewMatrix) else SkewMatrix(a)
        n = self.A.n
        if n % 2 != 0:
            raise ValueError(f"complex structures need even dimension, got {n}")
        arr = self.A.array
        eye = np.eye(n)
        ortho_defect = float(np.linalg.norm(arr.T @ arr - eye))
        square_defect = float(np.linalg.norm(arr @ arr + eye))
        if ortho_defect > STRUCTURE_DEFECT_TOL:
            raise ValueError(f"not orthogonal: defect {ortho_defect:.3e}")
        if square_defect > STRUCTURE_DEFECT_TOL:
            raise ValueError(f"square is not -identity: defect {square_defect:.3e}")
        self.defect = max(ortho_defect, square_defect)

    @property
    def dim(self) -> int:
        return self.A.n

    @property
    def m(self) -> int:
        return self.A.n // 2

    @classmethod
    def standard(cls, m: int) -> "ComplexStructure":
        """Block-diagonal quarter-turn in m consecutive coordinate pairs."""
        if m < 1:
            raise ValueError("m must be at least 1")
        k = SkewMatrix.zeros(2 * m)
        for b in range(m):
            k[2 * b, 2 * b + 1] = 1.0
        return cls(k)

    def is_signed_permutation(self, tol: float = SIGNED_PERM_TOL) -> bool:
        """True when every entry is 0 or +-1 within tol, one nonzero per row
        and column."""
        arr = self.A.array
        near_zero = np.abs(arr) <= tol
        near_unit = np.abs(np.abs(arr) - 1.0) <= tol
        if not np.all(near_zero | near_unit):
            return False
        support = ~near_zero
        return bool(np.all(support.sum(axis=0) == 1) and np.all(support.sum(axis=1) == 1))

    def __eq__(self, other):
        if not isinstance(other, ComplexStructure):
            return NotImplemented
        return self.A == other.A

    __hash__ = None

    def __repr__(self):
        return f"ComplexStructure(dim={self.dim})"


@dataclass(frozen=True)
class FrequencyBlock:
    """One rotation rate with its axes and block structure.

    axes are indices into the ascending eigenvalue order of the inertia
    matrix, stored ascending; structure is expressed in that axis order.
    """

    omega: float
    axes: tuple
    structure: ComplexStructure

    def __post_init__(self):
        axes = tuple(int(a) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        if self.omega <= 0:
            raise ValueError("block frequency must be positive")
        if len(axes) != self.structure.dim:
            raise ValueError(
                f"block has {len(axes)} axes but a structure of dimension {self.structure.dim}"
            )
        if len(set(axes)) != len(axes) or list(axes) != sorted(axes):
            raise ValueError("block axes must be strictly ascending")


def _squared_gap(w1: float, w2: float) -> float:
    """Relative separation of two rates, measured on the squares."""
    a, b = w1 * w1, w2 * w2
    return abs(a - b) / max(a, b)


class EquilibriumStructure:
    """Canonical description of a stationary rotation.

    Blocks are sorted by descending rate, axes ascending inside each
    block; the regular flag is computed, not supplied: it is true exactly
    when every block structure is a signed permutation matrix.
    """

    def __init__(self, blocks, fixed_axes, n: int, residual: float = 0.0,
                 cluster_tol: float = DEFAULT_CLUSTER_TOL):
        blocks = tuple(sorted(blocks, key=lambda b: -b.omega))
        fixed_axes = tuple(sorted(int(a) for a in fixed_axes))
        used = [a for b in blocks for a in b.axes] + list(fixed_axes)
        if sorted(used) != list(range(n)):
            raise ValueError(
                f"block and fixed axes must partition 0..{n - 1}, got {sorted(used)}"
            )
        for i in range(len(blocks) - 1):
            gap = _squared_gap(blocks[i].omega, blocks[i + 1].omega)
            if gap < cluster_tol:
                raise ValueError(
                    f"block rates {blocks[i].omega:.6g} and {blocks[i + 1].omega:.6g} "
                    f"too close (squared gap {gap:.3e} < {cluster_tol:.1e})"
                )
        self.blocks = blocks
        self.fixed_axes = fixed_axes
        self.n = n
        self.residual = float(residual)
        self.regular = all(b.structure.is_signed_permutation() for b in blocks)

    def matches(self, other: "EquilibriumStructure", omega_rtol: float = 1e-8,
                structure_atol: float = 1e-8) -> bool:
        """Canonical-form equality up to tiny numerical differences."""
        if self.n != other.n or self.regular != other.regular:
            return False
        if self.fixed_axes != other.fixed_axes or len(self.blocks) != len(other.blocks):
            return False
        for a, b in zip(self.blocks, other.blocks):
            if a.axes != b.axes:
                return False
            if abs(a.omega - b.omega) > omega_rtol * max(a.omega, b.omega):
                return False
            if np.max(np.abs(a.structure.A.array - b.structure.A.array)) > structure_atol:
                return False
        return True

    def __repr__(self):
        kind = "regular" if self.regular else "exotic"
        parts = ", ".join(f"w={b.omega:.6g} axes={b.axes}" for b in self.blocks)
        return f"EquilibriumStructure(n={self.n}, {kind}, [{parts}], fixed={self.fixed_axes})"


def is_equilibrium(m, body: InertiaSpec, tol: float = DEFAULT_TOL):
    """Test whether a momentum is a stationary rotation.

    Returns (flag, residual) with residual = ||[J, W^2]|| / (||J|| ||W||^2),
    all norms Frobenius. The equivalent form ||[M, W]|| is computed as a
    consistency check: the two commutators agree identically, so their
    difference beyond rounding indicates a corrupted inertia operator.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = _skew_array(m)
    _check_dims(arr, body)
    if np.linalg.norm(arr) == 0.0:
        return True, 0.0
    om = _invert_array(arr, body)
    j = body.J.array
    s = om @ om
    s = 0.5 * (s + s.T)
    js = j @ s
    c_js = js - js.T
    scale = np.linalg.norm(j) * np.linalg.norm(om) ** 2
    residual = float(np.linalg.norm(c_js) / scale)
    mo = arr @ om
    c_mo = mo - mo.T
    if np.linalg.norm(c_mo - c_js) > 1e-10 * scale:
        raise ArithmeticError(
            "commutator identity [M, W] = [J, W^2] violated beyond rounding"
        )
    return residual <= tol, residual


def _cluster_rates(values: np.ndarray, tol: float, cluster_tol: float):
    """Group squared rates (descending) into frequency clusters.

    values must be positive and sorted descending. Two values join the
    same cluster when they differ from the cluster head by at most
    tol * head, start a new cluster when they differ by at least
    cluster_tol * head, and raise AmbiguousClustering in between.
    """
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups:
            head = values[groups[-1][0]]
            diff = head - v
            if diff <= tol * head:
                groups[-1].append(i)
                continue
            if diff < cluster_tol * head:
                raise AmbiguousClustering(
                    f"rates^2 {head:.9g} and {v:.9g} are separated by {diff:.3e}, "
                    f"between tol ({tol * head:.3e}) and cluster_tol ({cluster_tol * head:.3e})"
                )
        groups.append([i])
    return groups


def classify(m, body: InertiaSpec, tol: float = DEFAULT_TOL,
             cluster_tol: float = DEFAULT_CLUSTER_TOL) -> EquilibriumStructure:
    """Normal form of a stationary rotation.

    In the inertia eigenframe: checks that W^2 is diagonal, groups its
    diagonal into frequency clusters (plus a zero group), extracts the
    block of W on each cluster, validates each block / rate as a complex
    structure, and reports the signed-permutation (regular) flag.

    Raises NotAnEquilibrium, OddBlock, or AmbiguousClustering.
    """
    if not 0 < tol < cluster_tol:
        raise ValueError("need 0 < tol < cluster_tol")
    ok, r_eq = is_equilibrium(m, body, tol)
    if not ok:
        raise NotAnEquilibrium(
            f"commutation residual {r_eq:.3e} exceeds tol {tol:.1e}", r_eq
        )
    arr = _skew_array(m)
    n = body.n
    consumed = r_eq
    if np.linalg.norm(arr) == 0.0:
        return EquilibriumStructure((), tuple(range(n)), n=n, residual=0.0,
                                    cluster_tol=cluster_tol)

    om_t = body.to_eigenframe(_invert_array(arr, body))
    om_t = 0.5 * (om_t - om_t.T)
    scale_w = np.linalg.norm(om_t)
    scale_s = scale_w ** 2
    s = om_t @ om_t
    s = 0.5 * (s + s.T)

    off = s - np.diag(np.diag(s))
    r_diag = float(np.max(np.abs(off)) / scale_s)
    if r_diag > tol:
        raise NotAnEquilibrium(
            f"W^2 is not diagonal in the inertia eigenframe (residual {r_diag:.3e})",
            r_diag,
        )
    consumed = max(consumed, r_diag)

    d = np.diag(s)
    zero_mask = np.abs(d) <= tol * scale_s
    zero_axes = [int(i) for i in np.flatnonzero(zero_mask)]
    live = np.flatnonzero(~zero_mask)
    vals = -d[live]  # squared rates, positive

    order = np.argsort(-vals, kind="stable")
    vals_sorted = vals[order]
    axes_sorted = live[order]
    groups = _cluster_rates(vals_sorted, tol, cluster_tol)

    # Entries of W outside the diagonal blocks (and on zero-group rows)
    # must vanish.
    allowed = np.zeros((n, n), dtype=bool)
    blocks = []
    for g in groups:
        axes = np.sort(axes_sorted[g])
        if len(axes) % 2 != 0:
            raise OddBlock(
                f"frequency group on axes {axes.tolist()} has odd size; "
                "nonzero rates pair up, so the tolerances are misconfigured"
            )
        allowed[np.ix_(axes, axes)] = True
        omega = float(np.sqrt(np.mean(vals_sorted[g])))
        block = om_t[np.ix_(axes, axes)]
        a = block / omega
        try:
            structure = ComplexStructure(SkewMatrix(a))
        except ValueError as exc:
            raise NotAnEquilibrium(f"block on axes {axes.tolist()}: {exc}", r_eq) from exc
        consumed = max(consumed, structure.defect)
        blocks.append(FrequencyBlock(omega=omega, axes=tuple(int(x) for x in axes),
                                     structure=structure))

    stray = np.where(allowed, 0.0, om_t)
    r_stray = float(np.max(np.abs(stray)) / scale_w) if stray.size else 0.0
    if r_stray > tol:
        raise NotAnEquilibrium(
            f"W has off-block entries of relative size {r_stray:.3e}", r_stray
        )
    consumed = max(consumed, r_stray)

    return EquilibriumStructure(blocks, zero_axes, n=n, residual=consumed,
                                cluster_tol=cluster_tol)


def build_omega(structure: EquilibriumStructure, body: InertiaSpec) -> SkewMatrix:
    """Assemble the angular velocity of a structure in the ambient frame."""
    if structure.n != body.n:
        raise ValueError(f"structure is {structure.n}-dimensional, body is {body.n}")
    om_t = np.zeros((body.n, body.n))
    for b in structure.blocks:
        idx = np.ix_(b.axes, b.axes)
        om_t[idx] = b.omega * b.structure.A.array
    return SkewMatrix(body.from_eigenframe(om_t))


def build_momentum(structure: EquilibriumStructure, body: InertiaSpec) -> SkewMatrix:
    return inertia_apply(build_omega(structure, body), body)


def _structure_from_rng(rng: np.random.Generator, m: int) -> ComplexStructure:
    """Conjugate the standard structure by an orthogonal matrix drawn via
    QR of a Gaussian matrix with the positive-diagonal convention."""
    g = rng.standard_normal((2 * m, 2 * m))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    q = q * d
    k = ComplexStructure.standard(m).A.array
    return ComplexStructure(SkewMatrix(q @ k @ q.T))


def random_complex_structure(m: int, seed: int) -> ComplexStructure:
    """Seeded draw from the orthogonal conjugation orbit of the standard
    structure (uniform over the space of compatible complex structures)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return _structure_from_rng(np.random.default_rng(seed), m)


@dataclass(frozen=True)
class RecipeBlock:
    """One requested block: axes, rate, and how to pick its structure.

    structure_source is "standard", "random", or an explicit
    ComplexStructure of matching dimension.
    """

    axes: tuple
    omega: float
    structure_source: object = "standard"

    def __post_init__(self):
        axes = tuple(int(a) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        if len(axes) < 2 or len(axes) % 2 != 0:
            raise ValueError(f"block needs a positive even number of axes, got {len(axes)}")
        if len(set(axes)) != len(axes):
            raise ValueError("block axes must be distinct")
        if self.omega <= 0:
            raise ValueError("block rate must be positive")
        src = self.structure_source
        if isinstance(src, str):
            if src not in ("standard", "random"):
                raise ValueError(f"unknown structure source {src!r}")
        elif isinstance(src, ComplexStructure):
            if src.dim != len(axes):
                raise ValueError(
                    f"explicit structure has dimension {src.dim}, block has {len(axes)} axes"
                )
        else:
            raise ValueError("structure source must be 'standard', 'random', or explicit")


@dataclass(frozen=True)
class GeneratorRecipe:
    """Declarative request for a stationary rotation.

    Blocks with structure_source "random" consume the seeded stream in
    recipe order, so a recipe is reproducible from (recipe, seed) alone.
    """

    blocks: tuple
    fixed_axes: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        blocks = tuple(self.blocks)
        fixed = tuple(int(a) for a in self.fixed_axes)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "fixed_axes", fixed)
        used = [a for b in blocks for a in b.axes] + list(fixed)
        if len(set(used)) != len(used):
            raise ValueError("recipe axes collide")
        omegas = [b.omega for b in blocks]
        for i, wi in enumerate(omegas):
            for wj in omegas[i + 1:]:
                if _squared_gap(wi, wj) < DEFAULT_CLUSTER_TOL:
                    raise ValueError(
                        f"recipe rates {wi:.6g} and {wj:.6g} are not distinct "
                        f"at the clustering tolerance"
                    )
        if any(b.structure_source == "random" for b in blocks) and self.seed is None:
            raise ValueError("recipes with random structures need a seed")

    @property
    def n(self) -> int:
        return len(self.fixed_axes) + sum(len(b.axes) for b in self.blocks)


def generate(recipe: GeneratorRecipe, body: InertiaSpec):
    """Realize a recipe as a stationary momentum.

    Returns (momentum, structure) where structure is the canonical form;
    standard structures give regular equilibria, random structures on
    blocks of four or more axes give exotic ones (up to a measure-zero
    set of draws).
    """
    used = sorted([a for b in recipe.blocks for a in b.axes] + list(recipe.fixed_axes))
    if used != list(range(body.n)):
        raise ValueError(
            f"recipe axes {used} do not cover the body dimension {body.n}"
        )
    rng = np.random.default_rng(recipe.seed) if recipe.seed is not None else None
    blocks = []
    for rb in recipe.blocks:
        m = len(rb.axes) // 2
        src = rb.structure_source
        if src == "standard":
            structure = ComplexStructure.standard(m)
        elif src == "random":
            structure = _structure_from_rng(rng, m)
        else:
            structure = src
        # Canonicalize: sort the axes ascending and permute the structure
        # into that order.
        perm = np.argsort(rb.axes, kind="stable")
        a_sorted = structure.A.array[np.ix_(perm, perm)]
        blocks.append(FrequencyBlock(
            omega=float(rb.omega),
            axes=tuple(sorted(rb.axes)),
            structure=ComplexStructure(SkewMatrix(a_sorted)),
        ))
    structure = EquilibriumStructure(blocks, recipe.fixed_axes, n=body.n)
    momentum = build_momentum(structure, body)
    ok, residual = is_equilibrium(momentum, body, 1e-10)
    if not ok:
        raise ArithmeticError(
            f"generated momentum misses the stationarity residual: {residual:.3e}"
        )
    structure.residual = residual
    return momentum, structure
