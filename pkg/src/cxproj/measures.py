"""Finitely supported probability measures on R^d.

A :class:`DiscreteMeasure` is an immutable pair of arrays: ``atoms`` with
shape ``(n, dim)`` and ``weights`` with shape ``(n,)``. Duplicate atoms are
allowed; :func:`canonicalize` merges them when a structural comparison is
needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySupport,
    NonFiniteCoordinate,
    NonPositiveScale,
    ParseError,
    SchemaVersionUnsupported,
)

#: Atoms whose normalized weight falls below this are discarded.
DROP_THRESHOLD = 1e-15

SCHEMA = "dmeasure/1"


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure ``sum_i weights[i] * delta_{atoms[i]}``.

    Build instances with :func:`validate_normalize` (or :func:`measure`);
    the constructor assumes its inputs are already valid.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        if self.n <= 4:
            body = ", ".join(
                f"{w:.4g}*d{tuple(np.round(a, 6).tolist())}"
                for a, w in zip(self.atoms, self.weights)
            )
        else:
            body = f"{self.n} atoms"
        return f"DiscreteMeasure(dim={self.dim}, {body})"


def validate_normalize(raw_atoms, raw_weights=None, dim=None) -> DiscreteMeasure:
    """Validate raw data and return a normalized :class:`DiscreteMeasure`.

    Parameters
    ----------
    raw_atoms : array_like
        Shape ``(n, dim)``, or ``(n,)`` for one-dimensional measures.
    raw_weights : array_like, optional
        Nonnegative weights with positive sum. Uniform when omitted.
    dim : int, optional
        Expected dimension; checked against the atoms when given.

    Weights are rescaled to sum to one, atoms whose weight ends up below
    ``DROP_THRESHOLD`` are removed and the remaining mass renormalized.
    Atom order is preserved.
    """
    atoms = np.asarray(raw_atoms, dtype=float)
    if atoms.ndim == 1:
        if dim is not None and dim > 1 and atoms.size == dim:
            atoms = atoms.reshape(1, -1)
        else:
            atoms = atoms.reshape(-1, 1)
    if atoms.ndim != 2:
        raise DimensionMismatch(f"atoms must be a 2-d array, got shape {atoms.shape}")
    n, d = atoms.shape
    if n == 0:
        raise EmptySupport("measure has no atoms")
    if dim is not None and d != dim:
        raise DimensionMismatch(f"atoms have dimension {d}, expected {dim}")
    if d == 0:
        raise DimensionMismatch("dimension must be positive")
    if not np.all(np.isfinite(atoms)):
        raise NonFiniteCoordinate("atom coordinates must be finite")

    if raw_weights is None:
        weights = np.full(n, 1.0 / n)
    else:
        weights = np.asarray(raw_weights, dtype=float).reshape(-1)
        if weights.shape[0] != n:
            raise DimensionMismatch(
                f"{n} atoms but {weights.shape[0]} weights"
            )
        if not np.all(np.isfinite(weights)):
            raise NonFiniteCoordinate("weights must be finite")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
    total = weights.sum()
    if not total > 0:
        raise EmptySupport("total mass is zero")
    weights = weights / total
    keep = weights >= DROP_THRESHOLD
    if not np.any(keep):
        raise EmptySupport("all weights are negligible")
    if not np.all(keep):
        atoms = atoms[keep]
        weights = weights[keep]
        weights = weights / weights.sum()
    return DiscreteMeasure(np.array(atoms, dtype=float), np.array(weights, dtype=float))


def measure(atoms, weights=None) -> DiscreteMeasure:
    """Shorthand for :func:`validate_normalize`."""
    return validate_normalize(atoms, weights)


def dirac(point) -> DiscreteMeasure:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    return validate_normalize(point.reshape(1, -1), [1.0])


def dilate(m: DiscreteMeasure, lam: float) -> DiscreteMeasure:
    """Push ``m`` forward under ``x -> lam * x``."""
    if not lam > 0:
        raise NonPositiveScale(f"dilation factor must be positive, got {lam}")
    return DiscreteMeasure(m.atoms * lam, m.weights.copy())


def pushforward(m: DiscreteMeasure, images) -> DiscreteMeasure:
    """Measure with atoms ``images[i]`` carrying the weights of ``m``."""
    images = np.asarray(images, dtype=float).reshape(m.n, -1)
    return validate_normalize(images, m.weights)


def moments(m: DiscreteMeasure):
    """Return ``(mean, M2)`` with ``M2 = sqrt(sum_i w_i |x_i|^2)``."""
    mean = m.weights @ m.atoms
    m2 = math.sqrt(math.fsum(m.weights * np.einsum("ij,ij->i", m.atoms, m.atoms)))
    return mean, m2


def canonicalize(m: DiscreteMeasure, decimals=None) -> DiscreteMeasure:
    """Sort atoms lexicographically and merge exact duplicates.

    With ``decimals`` set, atoms are rounded first so that near-equal atoms
    merge too.
    """
    atoms = m.atoms if decimals is None else np.round(m.atoms, decimals)
    uniq, inverse = np.unique(atoms, axis=0, return_inverse=True)
    weights = np.zeros(len(uniq))
    np.add.at(weights, inverse.reshape(-1), m.weights)
    return DiscreteMeasure(uniq.astype(float), weights / weights.sum())


def same_dim(*ms: DiscreteMeasure) -> int:
    d = ms[0].dim
    for m in ms[1:]:
        if m.dim != d:
            raise DimensionMismatch(f"dimensions differ: {d} vs {m.dim}")
    return d


# --------------------------------------------------------------------------
# JSON serialization
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    text = format(float(x), ".17g")
    # "-0" would decode as the integer 0 and lose the sign bit
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def dumps(m: DiscreteMeasure) -> str:
    """Serialize to the ``dmeasure/1`` JSON format.

    Numbers are written with 17 significant digits so that loading the text
    reproduces every float bit for bit.
    """
    atoms = ",\n    ".join("[" + ", ".join(_fmt(c) for c in a) + "]" for a in m.atoms)
    weights = ", ".join(_fmt(w) for w in m.weights)
    return (
        "{\n"
        f'  "schema": "{SCHEMA}",\n'
        f'  "dim": {m.dim},\n'
        f'  "atoms": [\n    {atoms}\n  ],\n'
        f'  "weights": [{weights}]\n'
        "}\n"
    )


def _number(x, field):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {x!r}", field=field)
    return float(x)


def from_dict(obj) -> DiscreteMeasure:
    """Build a measure from a decoded ``dmeasure/1`` document.

    Weights are taken as stored; only validity is checked, so a saved
    measure loads back bit-identical.
    """
    if not isinstance(obj, dict):
        raise ParseError("top-level value must be an object")
    schema = obj.get("schema")
    if schema is None:
        raise ParseError("missing schema tag", field="schema")
    if schema != SCHEMA:
        raise SchemaVersionUnsupported(f"unsupported schema {schema!r}")
    dim = obj.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParseError(f"dim must be a positive integer, got {dim!r}", field="dim")
    raw_atoms = obj.get("atoms")
    if not isinstance(raw_atoms, list) or not raw_atoms:
        raise ParseError("atoms must be a non-empty list", field="atoms")
    atoms = []
    for i, a in enumerate(raw_atoms):
        if not isinstance(a, list) or len(a) != dim:
            raise ParseError(f"atom must be a list of {dim} numbers", field=f"atoms[{i}]")
        atoms.append([_number(c, f"atoms[{i}]") for c in a])
    weights = None
    if "weights" in obj and obj["weights"] is not None:
        raw_w = obj["weights"]
        if not isinstance(raw_w, list):
            raise ParseError("weights must be a list", field="weights")
        if len(raw_w) != len(atoms):
            raise ParseError(
                f"{len(raw_w)} weights for {len(atoms)} atoms", field="weights"
            )
        weights = [_number(w, f"weights[{i}]") for i, w in enumerate(raw_w)]
        if any(w < 0 for w in weights):
            raise ParseError("weights must be nonnegative", field="weights")
    atoms_arr = np.array(atoms, dtype=float)
    if weights is not None:
        w = np.array(weights, dtype=float)
        if (
            np.all(w >= DROP_THRESHOLD)
            and abs(math.fsum(w) - 1.0) <= 1e-12
            and np.all(np.isfinite(atoms_arr))
        ):
            return DiscreteMeasure(atoms_arr, w)
    try:
        return validate_normalize(atoms_arr, weights, dim)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def loads(text: str) -> DiscreteMeasure:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return from_dict(obj)


PathOrStream = Union[str, Path, IO[str]]


def save(m: DiscreteMeasure, target: PathOrStream) -> None:
    text = dumps(m)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)


def load(source: PathOrStream) -> DiscreteMeasure:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return loads(text)


def to_dict(m: DiscreteMeasure) -> dict:
    return json.loads(dumps(m))


__all__ = [
    "DiscreteMeasure",
    "validate_normalize",
    "measure",
    "dirac",
    "dilate",
    "pushforward",
    "moments",
    "canonicalize",
    "same_dim",
    "dumps",
    "loads",
    "save",
    "load",
    "from_dict",
    "to_dict",
]
