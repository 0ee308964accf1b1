"""Problem files: JSON schema, generators, and canonical instances.

A problem file is a JSON document::

    {"dimension": d,
     "objectives": [{"kind": "quadratic", "H": [[...]], "z": [...]}, ...],
     "preference": {"kind": "quadratic", "H": [[...]], "z": [...]},
     "constants": {"mu": .., "L": .., "L_H": .., "L0": ..}}   # optional

Non-quadratic built-ins are referenced as
``{"kind": "builtin", "name": ..., "params": {...}}``.  The optional
constants block overrides the values computed for analytic families.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile

import numpy as np

from .errors import InvalidArgumentError
from .problem import (
    BUILTIN_FUNCTIONS,
    ObjectiveSet,
    ProblemInstance,
    SmoothFunction,
    quadratic_from_hessian,
)


def atomic_write_text(path: str, text: str):
    """Write via a temporary file plus rename so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _function_from_entry(entry: dict, dim: int, where: str) -> SmoothFunction:
    if not isinstance(entry, dict):
        raise InvalidArgumentError(f"{where}: expected an object")
    kind = entry.get("kind")
    if kind == "quadratic":
        for key in ("H", "z"):
            if key not in entry:
                raise InvalidArgumentError(f"{where}: missing field '{key}'")
        H = np.asarray(entry["H"], dtype=float)
        z = np.asarray(entry["z"], dtype=float)
        if H.shape != (dim, dim):
            raise InvalidArgumentError(f"{where}.H: expected shape ({dim}, {dim}), got {H.shape}")
        if z.shape != (dim,):
            raise InvalidArgumentError(f"{where}.z: expected length {dim}, got {z.shape}")
        return quadratic_from_hessian(H, z)
    if kind == "builtin":
        name = entry.get("name")
        if name not in BUILTIN_FUNCTIONS:
            raise InvalidArgumentError(f"{where}.name: unknown builtin '{name}'")
        fn = BUILTIN_FUNCTIONS[name](entry.get("params", {}))
        if fn.dim != dim:
            raise InvalidArgumentError(f"{where}: builtin dimension {fn.dim} != {dim}")
        return fn
    raise InvalidArgumentError(f"{where}.kind: expected 'quadratic' or 'builtin', got {kind!r}")


def problem_from_spec(spec: dict) -> ProblemInstance:
    if not isinstance(spec, dict):
        raise InvalidArgumentError("problem file: top level must be an object")
    if "dimension" not in spec:
        raise InvalidArgumentError("problem file: missing field 'dimension'")
    dim = spec["dimension"]
    if not isinstance(dim, int) or dim < 1:
        raise InvalidArgumentError(f"dimension: expected a positive integer, got {dim!r}")
    entries = spec.get("objectives")
    if not isinstance(entries, list) or not entries:
        raise InvalidArgumentError("objectives: expected a nonempty list")
    objectives = [
        _function_from_entry(e, dim, f"objectives[{i}]") for i, e in enumerate(entries)
    ]
    if "preference" not in spec:
        raise InvalidArgumentError("problem file: missing field 'preference'")
    f0 = _function_from_entry(spec["preference"], dim, "preference")
    F = ObjectiveSet.from_objectives(objectives)
    constants = spec.get("constants")
    if constants is not None:
        if not isinstance(constants, dict):
            raise InvalidArgumentError("constants: expected an object")
        updates = {}
        for key in ("mu", "L", "L_H"):
            if key in constants:
                updates[key] = float(constants[key])
        if updates:
            F = dataclasses.replace(F, **updates)
        if not (0 < F.mu <= F.L):
            raise InvalidArgumentError("constants: require 0 < mu <= L")
        if "L0" in constants:
            f0 = dataclasses.replace(f0, L=float(constants["L0"]))
    return ProblemInstance.create(F, f0)


def load_problem(path: str) -> ProblemInstance:
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"problem file is not valid JSON: {exc}") from exc
    return problem_from_spec(spec)


def save_problem_spec(path: str, spec: dict):
    atomic_write_text(path, json.dumps(spec, indent=2) + "\n")


def _quadratic_entry(H: np.ndarray, z: np.ndarray) -> dict:
    return {"kind": "quadratic", "H": np.asarray(H, float).tolist(), "z": np.asarray(z, float).tolist()}


def png_counterexample_spec() -> dict:
    """Two shared-Hessian quadratics whose navigation dynamics miss the optimum.

    Centers at -e1 and +e1 with Hessian [[1, 1], [1, 2]]; the preference is
    0.5 * ||x - e2||^2 and its unique optimum over the Pareto segment is the
    origin.
    """
    H = [[1.0, 1.0], [1.0, 2.0]]
    return {
        "dimension": 2,
        "objectives": [
            _quadratic_entry(H, [-1.0, 0.0]),
            _quadratic_entry(H, [1.0, 0.0]),
        ],
        "preference": _quadratic_entry(np.eye(2), [0.0, 1.0]),
    }


def identity_pair_spec() -> dict:
    """Two identity-Hessian quadratics at -e1 and +e1, preference toward e2."""
    return {
        "dimension": 2,
        "objectives": [
            _quadratic_entry(np.eye(2), [-1.0, 0.0]),
            _quadratic_entry(np.eye(2), [1.0, 0.0]),
        ],
        "preference": _quadratic_entry(np.eye(2), [0.0, 1.0]),
    }


def triangle_spec() -> dict:
    """Three anisotropic quadratics in the plane with a curved stationary set."""
    return {
        "dimension": 2,
        "objectives": [
            _quadratic_entry([[3.0, 0.0], [0.0, 0.5]], [0.0, 0.0]),
            _quadratic_entry([[0.5, 0.0], [0.0, 3.0]], [2.0, 0.0]),
            _quadratic_entry([[2.0, 0.9], [0.9, 2.0]], [1.0, 1.8]),
        ],
        "preference": _quadratic_entry(np.eye(2), [1.0, 0.7]),
    }


def single_objective_spec() -> dict:
    return {
        "dimension": 2,
        "objectives": [_quadratic_entry([[2.0, 0.0], [0.0, 1.0]], [0.5, -0.25])],
        "preference": _quadratic_entry(np.eye(2), [0.0, 1.0]),
    }


def random_problem_spec(
    rng: np.random.Generator,
    dimension: int,
    n_objectives: int,
    shared_hessian: bool = False,
    eig_range=(0.5, 3.0),
    center_scale: float = 1.5,
) -> dict:
    """Random positive-definite quadratic instance."""

    def random_spd():
        Q, _ = np.linalg.qr(rng.normal(size=(dimension, dimension)))
        eigs = rng.uniform(*eig_range, size=dimension)
        H = Q @ np.diag(eigs) @ Q.T
        return 0.5 * (H + H.T)

    shared = random_spd() if shared_hessian else None
    objectives = []
    for _ in range(n_objectives):
        H = shared if shared is not None else random_spd()
        z = rng.normal(size=dimension) * center_scale
        objectives.append(_quadratic_entry(H, z))
    preference = _quadratic_entry(random_spd(), rng.normal(size=dimension) * center_scale)
    return {"dimension": dimension, "objectives": objectives, "preference": preference}


PRESETS = {
    "png-example": png_counterexample_spec,
    "identity-pair": identity_pair_spec,
    "triangle": triangle_spec,
    "single-objective": single_objective_spec,
}


def png_counterexample_problem() -> ProblemInstance:
    return problem_from_spec(png_counterexample_spec())


def identity_pair_problem() -> ProblemInstance:
    return problem_from_spec(identity_pair_spec())
