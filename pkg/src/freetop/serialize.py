"""File formats: canonical JSON, matrix / structure / recipe documents,
trajectory CSV and JSON-lines export.

All floating-point output goes through a 17-significant-digit formatter,
so emitted values parse back bit-exactly and re-running a command yields
byte-identical files. Readers validate against the documented schemas and
report the offending field path.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .body import InertiaSpec, Trajectory, casimir_labels, manakov_labels
from .equilibria import (
    ComplexStructure,
    EquilibriumStructure,
    FrequencyBlock,
    GeneratorRecipe,
    RecipeBlock,
)
from .linalg import SkewMatrix, SymMatrix
from .stability import LinearizationReport, OrbitKernelReport, ProbeResult

__all__ = [
    "SchemaError",
    "SPEC_VERSION",
    "format_float",
    "dumps_canonical",
    "write_json",
    "load_json",
    "matrix_to_doc",
    "matrix_from_doc",
    "read_matrix",
    "write_matrix",
    "body_from_doc",
    "read_body",
    "structure_to_doc",
    "structure_from_doc",
    "recipe_to_doc",
    "recipe_from_doc",
    "linearization_to_doc",
    "orbit_kernel_to_doc",
    "probe_to_doc",
    "write_trajectory_csv",
    "write_trajectory_jsonl",
    "write_probe_curve_csv",
    "drift_summary_doc",
]

SPEC_VERSION = "1"


class SchemaError(ValueError):
    """Input document violates a schema; carries the field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def format_float(x: float) -> str:
    """17-significant-digit decimal form; parses back to the same bits."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def _emit(obj, indent: int | None, level: int) -> str:
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), indent, level)
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            return "[]"
        flat = all(not isinstance(it, (list, tuple, dict, np.ndarray)) for it in items)
        if flat or indent is None:
            return "[" + ", ".join(_emit(it, None, 0) for it in items) + "]"
        pad = " " * (indent * (level + 1))
        close = " " * (indent * level)
        inner = ",\n".join(pad + _emit(it, indent, level + 1) for it in items)
        return "[\n" + inner + "\n" + close + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if indent is None:
            inner = ", ".join(
                f"{json.dumps(str(k))}: {_emit(v, None, 0)}" for k, v in obj.items()
            )
            return "{" + inner + "}"
        pad = " " * (indent * (level + 1))
        close = " " * (indent * level)
        inner = ",\n".join(
            f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}"
            for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + close + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj, indent: int | None = 2) -> str:
    """Deterministic JSON text: insertion-ordered keys, floats via
    format_float. indent=None gives a single line (JSON-lines entries)."""
    return _emit(obj, indent, 0)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(obj) + "\n")


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


# -- generic field helpers ------------------------------------------------

def _want(doc, field, kinds, path, kind_name):
    if field not in doc:
        raise SchemaError(_join(path, field), "missing required field")
    value = doc[field]
    if isinstance(value, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        raise SchemaError(_join(path, field), f"expected {kind_name}, got a boolean")
    if not isinstance(value, kinds):
        raise SchemaError(_join(path, field), f"expected {kind_name}, got {type(value).__name__}")
    return value


def _join(path: str, field) -> str:
    field = str(field)
    if not path:
        return field
    return f"{path}.{field}" if not field.startswith("[") else path + field


def _check_version(doc, path):
    version = _want(doc, "spec_version", str, path, "a string")
    major = version.split(".", 1)[0]
    if major != SPEC_VERSION:
        raise SchemaError(_join(path, "spec_version"),
                          f"unsupported major version {version!r} (supported: {SPEC_VERSION})")


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise SchemaError(path, "value must be finite")
    return float(value)


def _int_list(value, path):
    if not isinstance(value, list):
        raise SchemaError(path, f"expected a list, got {type(value).__name__}")
    out = []
    for k, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, int):
            raise SchemaError(f"{path}[{k}]", "expected an integer")
        out.append(item)
    return out


def _rows(value, n, path):
    if not isinstance(value, list) or len(value) != n:
        raise SchemaError(path, f"expected a list of {n} rows")
    out = np.empty((n, n))
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{path}[{i}]", f"expected a list of {n} numbers")
        for j, item in enumerate(row):
            out[i, j] = _number(item, f"{path}[{i}][{j}]")
    return out


# -- matrix documents ------------------------------------------------------

def matrix_to_doc(m, kind: str | None = None) -> dict:
    if isinstance(m, SymMatrix):
        kind = kind or "sym"
    elif isinstance(m, SkewMatrix):
        kind = kind or "skew"
    else:
        kind = kind or "general"
    arr = np.asarray(m, dtype=float)
    return {
        "spec_version": SPEC_VERSION,
        "n": int(arr.shape[0]),
        "kind": kind,
        "rows": arr.tolist(),
    }


def matrix_from_doc(doc, path: str = "", require_version: bool = True):
    """Parse {"n", "kind", "rows"} into SymMatrix / SkewMatrix / ndarray."""
    if not isinstance(doc, dict):
        raise SchemaError(path or "<root>", "expected a JSON object")
    if require_version:
        _check_version(doc, path)
    n = _want(doc, "n", int, path, "an integer")
    if n < 1:
        raise SchemaError(_join(path, "n"), "dimension must be positive")
    kind = _want(doc, "kind", str, path, "a string")
    if kind not in ("sym", "skew", "general"):
        raise SchemaError(_join(path, "kind"), f"unknown kind {kind!r}")
    rows = _rows(_want(doc, "rows", list, path, "a list"), n, _join(path, "rows"))
    try:
        if kind == "sym":
            return SymMatrix(rows)
        if kind == "skew":
            return SkewMatrix(rows)
    except ValueError as exc:
        raise SchemaError(_join(path, "rows"), str(exc)) from exc
    return rows


def read_matrix(path):
    return matrix_from_doc(load_json(path))


def write_matrix(path, m, kind: str | None = None) -> None:
    write_json(path, matrix_to_doc(m, kind))


def body_from_doc(doc, path: str = "", require_version: bool = True) -> InertiaSpec:
    """Inertia from {"eigenvalues": [...]} or a symmetric matrix document."""
    if not isinstance(doc, dict):
        raise SchemaError(path or "<root>", "expected a JSON object")
    if "eigenvalues" in doc:
        if require_version:
            _check_version(doc, path)
        raw = _want(doc, "eigenvalues", list, path, "a list")
        vals = [_number(v, f"{_join(path, 'eigenvalues')}[{k}]") for k, v in enumerate(raw)]
        if len(vals) < 2:
            raise SchemaError(_join(path, "eigenvalues"), "need at least two moments")
        try:
            return InertiaSpec.from_eigenvalues(vals)
        except ValueError as exc:
            raise SchemaError(_join(path, "eigenvalues"), str(exc)) from exc
    m = matrix_from_doc(doc, path, require_version=require_version)
    if not isinstance(m, SymMatrix):
        raise SchemaError(_join(path, "kind"), "inertia matrix must have kind 'sym'")
    try:
        return InertiaSpec(m)
    except ValueError as exc:
        raise SchemaError(_join(path, "rows"), str(exc)) from exc


def read_body(path) -> InertiaSpec:
    return body_from_doc(load_json(path))


# -- equilibrium structures ------------------------------------------------

def structure_to_doc(s: EquilibriumStructure) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "n": s.n,
        "blocks": [
            {
                "omega": b.omega,
                "axes": list(b.axes),
                "A": b.structure.A.array.tolist(),
            }
            for b in s.blocks
        ],
        "fixed_axes": list(s.fixed_axes),
        "regular": s.regular,
        "residual": s.residual,
    }


def structure_from_doc(doc, path: str = "") -> EquilibriumStructure:
    if not isinstance(doc, dict):
        raise SchemaError(path or "<root>", "expected a JSON object")
    _check_version(doc, path)
    n = _want(doc, "n", int, path, "an integer")
    raw_blocks = _want(doc, "blocks", list, path, "a list")
    blocks = []
    for k, rb in enumerate(raw_blocks):
        bpath = _join(path, f"blocks[{k}]")
        if not isinstance(rb, dict):
            raise SchemaError(bpath, "expected an object")
        omega = _number(_want(rb, "omega", (int, float), bpath, "a number"), _join(bpath, "omega"))
        axes = _int_list(_want(rb, "axes", list, bpath, "a list"), _join(bpath, "axes"))
        a_rows = _rows(_want(rb, "A", list, bpath, "a list"), len(axes), _join(bpath, "A"))
        try:
            blocks.append(FrequencyBlock(
                omega=omega, axes=tuple(axes),
                structure=ComplexStructure(SkewMatrix(a_rows)),
            ))
        except ValueError as exc:
            raise SchemaError(bpath, str(exc)) from exc
    fixed = _int_list(_want(doc, "fixed_axes", list, path, "a list"), _join(path, "fixed_axes"))
    residual = _number(doc.get("residual", 0.0), _join(path, "residual"))
    try:
        structure = EquilibriumStructure(blocks, fixed, n=n, residual=residual)
    except ValueError as exc:
        raise SchemaError(path or "<root>", str(exc)) from exc
    if "regular" in doc and bool(doc["regular"]) != structure.regular:
        raise SchemaError(_join(path, "regular"),
                          f"flag {doc['regular']} contradicts the block structures")
    return structure


# -- generator recipes -----------------------------------------------------

def recipe_to_doc(r: GeneratorRecipe) -> dict:
    blocks = []
    for b in r.blocks:
        src = b.structure_source
        entry = {"omega": b.omega, "axes": list(b.axes)}
        if isinstance(src, ComplexStructure):
            entry["structure_source"] = {"A": src.A.array.tolist()}
        else:
            entry["structure_source"] = src
        blocks.append(entry)
    doc = {
        "spec_version": SPEC_VERSION,
        "blocks": blocks,
        "fixed_axes": list(r.fixed_axes),
    }
    if r.seed is not None:
        doc["seed"] = r.seed
    return doc


def recipe_from_doc(doc, path: str = "", default_seed: int | None = None) -> GeneratorRecipe:
    """Parse a recipe document. A "seed" field in the document is pinned;
    default_seed fills in when the document has none."""
    if not isinstance(doc, dict):
        raise SchemaError(path or "<root>", "expected a JSON object")
    _check_version(doc, path)
    raw_blocks = _want(doc, "blocks", list, path, "a list")
    blocks = []
    for k, rb in enumerate(raw_blocks):
        bpath = _join(path, f"blocks[{k}]")
        if not isinstance(rb, dict):
            raise SchemaError(bpath, "expected an object")
        omega = _number(_want(rb, "omega", (int, float), bpath, "a number"), _join(bpath, "omega"))
        axes = _int_list(_want(rb, "axes", list, bpath, "a list"), _join(bpath, "axes"))
        raw_src = rb.get("structure_source", "standard")
        if isinstance(raw_src, str):
            src = raw_src
        elif isinstance(raw_src, dict) and "A" in raw_src:
            a_rows = _rows(raw_src["A"], len(axes), _join(bpath, "structure_source.A"))
            try:
                src = ComplexStructure(SkewMatrix(a_rows))
            except ValueError as exc:
                raise SchemaError(_join(bpath, "structure_source.A"), str(exc)) from exc
        else:
            raise SchemaError(_join(bpath, "structure_source"),
                              "expected 'standard', 'random', or {'A': rows}")
        try:
            blocks.append(RecipeBlock(axes=tuple(axes), omega=omega, structure_source=src))
        except ValueError as exc:
            raise SchemaError(bpath, str(exc)) from exc
    fixed = _int_list(doc.get("fixed_axes", []), _join(path, "fixed_axes"))
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise SchemaError(_join(path, "seed"), "expected an integer")
    if seed is None:
        seed = default_seed
    try:
        return GeneratorRecipe(blocks=tuple(blocks), fixed_axes=tuple(fixed), seed=seed)
    except ValueError as exc:
        raise SchemaError(path or "<root>", str(exc)) from exc


# -- stability reports -----------------------------------------------------

def linearization_to_doc(rep: LinearizationReport) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "dim": rep.dim,
        "spectrum": [[float(z.real), float(z.imag)] for z in rep.spectrum],
        "max_real_part": rep.max_real_part,
        "matrix": rep.matrix.tolist(),
    }


def orbit_kernel_to_doc(rep: OrbitKernelReport, stabilizer_dim: int | None = None) -> dict:
    doc = {
        "spec_version": SPEC_VERSION,
        "map_rank": rep.map_rank,
        "kernel_dim": rep.kernel_dim,
        "rank_tol": rep.rank_tol,
        "singular_values": [float(s) for s in rep.singular_values],
    }
    if stabilizer_dim is not None:
        doc["stabilizer_dim"] = stabilizer_dim
        doc["excess_kernel_dim"] = rep.kernel_dim - stabilizer_dim
    return doc


def probe_to_doc(res: ProbeResult, eps: float, exit_factor: float) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "eps": eps,
        "exit_factor": exit_factor,
        "escaped": res.escaped,
        "exit_time": res.exit_time,
        "samples": int(res.times.size),
        "max_deviation": float(res.deviations.max()),
    }


# -- trajectory export -----------------------------------------------------

def _trajectory_columns(traj: Trajectory, n: int) -> list[str]:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return (
        ["t"]
        + [f"m_{i}_{j}" for i, j in pairs]
        + ["energy"]
        + casimir_labels(n)
        + manakov_labels(traj.manakov_max_power)
    )


def _sample_row(sample, n: int) -> list[float]:
    m = sample.state.M.array
    iu = np.triu_indices(n, k=1)
    return (
        [sample.t]
        + list(m[iu])
        + [sample.invariants.energy]
        + list(sample.invariants.casimirs)
        + list(sample.invariants.manakov)
    )


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Columns: t, upper-triangle momentum entries (row-major), energy,
    casimir_k, manakov_k_j."""
    n = traj.samples[0].state.M.n
    header = ",".join(_trajectory_columns(traj, n))
    lines = [header]
    for sample in traj.samples:
        lines.append(",".join(format_float(v) for v in _sample_row(sample, n)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trajectory_jsonl(path, traj: Trajectory) -> None:
    """One JSON object per sample, mirroring the CSV fields."""
    n = traj.samples[0].state.M.n
    iu = np.triu_indices(n, k=1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in traj.samples:
            doc = {
                "t": sample.t,
                "m_upper": list(sample.state.M.array[iu]),
                "energy": sample.invariants.energy,
                "casimirs": list(sample.invariants.casimirs),
                "manakov": list(sample.invariants.manakov),
            }
            fh.write(dumps_canonical(doc, indent=None) + "\n")


def write_probe_curve_csv(path, res: ProbeResult) -> None:
    lines = ["t,deviation"]
    for t, d in zip(res.times, res.deviations):
        lines.append(f"{format_float(float(t))},{format_float(float(d))}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def drift_summary_doc(traj: Trajectory) -> dict:
    summary = traj.drift_summary()
    momentum = summary.pop("momentum_displacement")
    return {
        "spec_version": SPEC_VERSION,
        "samples": len(traj.samples),
        "dt": traj.step,
        "record_every": traj.record_every,
        "t_end": traj.samples[-1].t,
        "momentum_displacement": momentum,
        "max_drift": max(summary.values()) if summary else 0.0,
        "drift": summary,
    }
