"""Declarative simulation scenarios.

A scenario file bundles the body, an initial momentum (inline matrix or
generator recipe), integrator settings, and the requested output files.
Running one is deterministic given the file plus the effective seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .body import InertiaSpec, Trajectory, integrate
from .equilibria import GeneratorRecipe, generate
from .linalg import SkewMatrix
from .serialize import (
    SchemaError,
    _check_version,
    _join,
    _number,
    _want,
    body_from_doc,
    matrix_from_doc,
    recipe_from_doc,
)

__all__ = ["Scenario", "scenario_from_doc", "run_scenario"]

OUTPUT_KEYS = ("trajectory_csv", "trajectory_jsonl", "invariants_json", "report_json")


@dataclass
class Scenario:
    body: InertiaSpec
    initial: SkewMatrix | None
    recipe: GeneratorRecipe | None
    dt: float
    t_end: float
    record_every: int = 1
    guard: str = "reject"
    seed: int = 0
    manakov_max_power: int | None = None
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.initial is None) == (self.recipe is None):
            raise ValueError("exactly one of initial / recipe must be given")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")


def scenario_from_doc(doc, seed_override: int | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "expected a JSON object")
    _check_version(doc, "")
    body = body_from_doc(_want(doc, "body", dict, "", "an object"), "body",
                         require_version=False)

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SchemaError("seed", "expected an integer")
    if seed_override is not None:
        seed = seed_override

    raw_initial = _want(doc, "initial", dict, "", "an object")
    keys = set(raw_initial.keys())
    if keys == {"matrix"}:
        m = matrix_from_doc(raw_initial["matrix"], "initial.matrix", require_version=False)
        if not isinstance(m, SkewMatrix):
            raise SchemaError("initial.matrix.kind", "initial momentum must have kind 'skew'")
        initial, recipe = m, None
    elif keys == {"recipe"}:
        recipe = recipe_from_doc(raw_initial["recipe"], "initial.recipe",
                                 default_seed=seed)
        initial = None
    else:
        raise SchemaError("initial", "expected exactly one of 'matrix' or 'recipe'")

    integ = _want(doc, "integrator", dict, "", "an object")
    dt = _number(_want(integ, "dt", (int, float), "integrator", "a number"), "integrator.dt")
    t_end = _number(_want(integ, "t_end", (int, float), "integrator", "a number"),
                    "integrator.t_end")
    record_every = integ.get("record_every", 1)
    if isinstance(record_every, bool) or not isinstance(record_every, int) or record_every < 1:
        raise SchemaError("integrator.record_every", "expected a positive integer")
    guard = integ.get("guard", "reject")
    if guard not in ("reject", "warn"):
        raise SchemaError("integrator.guard", "expected 'reject' or 'warn'")
    max_power = integ.get("manakov_max_power")
    if max_power is not None and (isinstance(max_power, bool) or not isinstance(max_power, int)):
        raise SchemaError("integrator.manakov_max_power", "expected an integer")
    if dt <= 0:
        raise SchemaError("integrator.dt", "must be positive")
    if t_end <= 0:
        raise SchemaError("integrator.t_end", "must be positive")

    outputs = doc.get("outputs", {})
    if not isinstance(outputs, dict):
        raise SchemaError("outputs", "expected an object")
    for key, value in outputs.items():
        if key not in OUTPUT_KEYS:
            raise SchemaError(_join("outputs", key),
                              f"unknown output (known: {', '.join(OUTPUT_KEYS)})")
        if not isinstance(value, str):
            raise SchemaError(_join("outputs", key), "expected a file name")

    try:
        return Scenario(body=body, initial=initial, recipe=recipe, dt=dt, t_end=t_end,
                        record_every=record_every, guard=guard, seed=seed,
                        manakov_max_power=max_power, outputs=dict(outputs))
    except ValueError as exc:
        raise SchemaError("<root>", str(exc)) from exc


def run_scenario(sc: Scenario) -> Trajectory:
    """Resolve the initial momentum and integrate."""
    if sc.initial is not None:
        m0 = sc.initial
    else:
        m0, _ = generate(sc.recipe, sc.body)
    return integrate(m0, sc.body, sc.dt, sc.t_end, sc.record_every,
                     manakov_max_power=sc.manakov_max_power, guard=sc.guard)
