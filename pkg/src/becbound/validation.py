"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .code import BUILTIN_NAMES, AlistError, TannerGraph, builtin_code, generate_regular, parse_alist


class ValidationError(ValueError):
    """Bad user input (maps to exit status 2 on the command line)."""


def check_graph(code) -> TannerGraph:
    """Accept a graph, a 0/1 matrix, or a code source string.

    Source strings: ``builtin:NAME``, ``regular:N,DV,DC,SEED``, or a path to an
    alist (or ``.json``) file.
    """
    if isinstance(code, TannerGraph):
        return code
    if isinstance(code, (str, os.PathLike)):
        return load_code(str(code))
    try:
        H = np.asarray(code)
    except Exception as exc:  # pragma: no cover - numpy raises many types
        raise ValidationError(f"cannot interpret {type(code).__name__} as a code") from exc
    if H.ndim != 2 or not np.isin(H, (0, 1)).all():
        raise ValidationError("parity-check matrix must be a 2-D 0/1 array")
    try:
        return TannerGraph.from_matrix(H)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def load_code(source: str) -> TannerGraph:
    kind, _, rest = source.partition(":")
    try:
        if kind == "builtin" and rest:
            if rest not in BUILTIN_NAMES:
                raise ValidationError(f"unknown builtin code {rest!r}; choose from {', '.join(BUILTIN_NAMES)}")
            return builtin_code(rest)
        if kind == "regular" and rest:
            parts = [int(p) for p in rest.split(",")]
            if len(parts) != 4:
                raise ValidationError("regular code spec is N,DV,DC,SEED")
            return generate_regular(*parts)
        path = Path(source)
        text = path.read_text()
        if path.suffix == ".json":
            return TannerGraph.from_json(text, name=path.stem)
        return parse_alist(text, name=path.stem)
    except ValidationError:
        raise
    except AlistError as exc:
        raise ValidationError(f"{source}: {exc}") from exc
    except (OSError, ValueError, KeyError) as exc:
        raise ValidationError(f"{source}: {exc}") from exc


def check_probability(eps, allow_zero: bool = True) -> np.ndarray:
    e = np.atleast_1d(np.asarray(eps, dtype=float))
    low_ok = e >= 0 if allow_zero else e > 0
    if e.size == 0 or not np.all(low_ok & (e <= 1)):
        side = "[0, 1]" if allow_zero else "(0, 1]"
        raise ValidationError(f"erasure probabilities must lie in {side}")
    return e


def make_grid(start: float = 0.01, stop: float = 1.0, count: int = 100, scale: str = "linear") -> np.ndarray:
    if count < 1:
        raise ValidationError("grid count must be positive")
    if scale == "linear":
        grid = np.linspace(start, stop, count)
    elif scale == "log":
        if start <= 0:
            raise ValidationError("log grid needs a positive start")
        grid = np.geomspace(start, stop, count)
    else:
        raise ValidationError(f"grid scale must be linear or log, not {scale!r}")
    return check_grid(grid)


def check_grid(grid) -> np.ndarray:
    return check_probability(grid, allow_zero=False)


def parse_grid(spec: str) -> np.ndarray:
    """``START:STOP:COUNT[:log]`` or a comma-separated list of values."""
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) not in (3, 4):
                raise ValidationError("grid spec is START:STOP:COUNT[:linear|log]")
            scale = parts[3] if len(parts) == 4 else "linear"
            return make_grid(float(parts[0]), float(parts[1]), int(parts[2]), scale)
        return check_grid([float(x) for x in spec.split(",") if x.strip()])
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad grid {spec!r}: {exc}") from exc


def check_bits(bits: str | Iterable[int] | None, n: int) -> list[int]:
    if bits is None or (isinstance(bits, str) and bits.strip() == "all"):
        return list(range(n))
    if isinstance(bits, str):
        try:
            bits = [int(b) for b in bits.split(",") if b.strip()]
        except ValueError as exc:
            raise ValidationError(f"bit list must be 'all' or comma-separated integers: {exc}") from exc
    out = list(bits)
    if not out:
        raise ValidationError("bit list is empty")
    for b in out:
        if not 0 <= int(b) < n:
            raise ValidationError(f"bit {b} out of range 0..{n - 1}")
    if len(set(out)) != len(out):
        raise ValidationError("bit list has duplicates")
    return [int(b) for b in out]


def check_positive(name: str, value: int) -> int:
    if int(value) < 1:
        raise ValidationError(f"{name} must be positive")
    return int(value)


def check_composite(spec: str | None) -> tuple[str, int] | None:
    """``STRATEGY:DEPTH`` such as ``nonuniform:4``."""
    if spec is None:
        return None
    strategy, _, depth = spec.partition(":")
    if strategy not in ("uniform", "nonuniform") or not depth.isdigit():
        raise ValidationError("composite spec is uniform:D or nonuniform:D")
    return strategy, int(depth)


def check_sequence(name: str, values: Sequence, n: int) -> None:
    if len(values) != n:
        raise ValidationError(f"{name} has length {len(values)}, expected {n}")
