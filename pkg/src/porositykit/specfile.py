"""Key-value object descriptions for measures and sets.

A spec is a text file of ``key = value`` lines (``#`` starts a comment)::

    kind = bernoulli
    q = 0.25
    max_depth = 4000

Custom measures list one weight row per ``row`` line.  Every error names the
offending field.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable

from .errors import InvalidArgument
from .measures import (CascadeMeasure, bernoulli_cascade, comb_measure,
                       counterexample_measure, custom_measure, lebesgue)
from .sets import (DyadicSet, comb_set, digit_constraint_set, even_digits_zero,
                   example_set, full_set)

__all__ = ["parse_spec", "load_spec", "build_measure", "build_set",
           "MEASURE_KINDS", "SET_KINDS"]

MEASURE_KINDS = ("counterexample", "bernoulli", "custom", "lebesgue", "comb")
SET_KINDS = ("comb", "example", "digit-constraint", "even-digits-zero", "full")


def parse_spec(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines; repeated ``row`` keys collect into a list."""
    out: dict[str, object] = {}
    rows: list[str] = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise InvalidArgument(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split(sep, 1))
        key = key.replace("-", "_").lower()
        if key == "row":
            rows.append(value)
        elif key in out:
            raise InvalidArgument(f"field '{key}' given twice")
        else:
            out[key] = value
    if rows:
        out["rows"] = rows
    return out


def load_spec(path) -> dict[str, object]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read spec file {path}: {exc.strerror}") from exc
    return parse_spec(text)


def _get(spec: dict, key: str, conv: Callable, default=None, required: bool = False):
    if key not in spec or spec[key] in ("", None):
        if required:
            raise InvalidArgument(f"missing field '{key}'")
        return default
    raw = spec[key]
    try:
        return conv(raw) if isinstance(raw, str) else raw
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"field '{key}': cannot parse {raw!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _float_row(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _log_base(text: str) -> float:
    return math.e if text.strip().lower() in ("e", "natural") else float(text)


def build_measure(spec: dict) -> CascadeMeasure:
    kind = _get(spec, "kind", str, required=True)
    depth = _get(spec, "max_depth", int, 256)
    if depth < 1:
        raise InvalidArgument("field 'max_depth' must be positive")
    if kind == "counterexample":
        return counterexample_measure(_get(spec, "log_base", _log_base, math.e), depth)
    if kind == "bernoulli":
        return bernoulli_cascade(_get(spec, "q", float, required=True), depth)
    if kind == "lebesgue":
        return lebesgue(depth)
    if kind == "comb":
        return comb_measure(_get(spec, "arity_log", int, required=True),
                            _get(spec, "keep", _int_list, required=True), depth)
    if kind == "custom":
        rows = spec.get("rows")
        if not rows:
            raise InvalidArgument("field 'row': custom measures need weight rows")
        try:
            table = [_float_row(r) for r in rows]
        except ValueError as exc:
            raise InvalidArgument(f"field 'row': {exc}") from exc
        k = _get(spec, "arity_log", int, None)
        if k is None:
            width = len(table[0])
            k = width.bit_length() - 1
            if width != 1 << k:
                raise InvalidArgument("field 'row': row length must be a power of two")
        return custom_measure(k, table, depth)
    raise InvalidArgument(f"field 'kind': unknown measure kind {kind!r} "
                          f"(expected one of {', '.join(MEASURE_KINDS)})")


def _fixed(text: str) -> dict[int, int]:
    out = {}
    for item in text.replace(",", " ").split():
        r, d = item.split(":")
        out[int(r)] = int(d)
    return out


def build_set(spec: dict) -> DyadicSet:
    kind = _get(spec, "kind", str, required=True)
    if kind == "comb":
        return comb_set(_get(spec, "arity_log", int, required=True),
                        _get(spec, "keep", _int_list, required=True),
                        _get(spec, "build_depth", int, required=True))
    if kind == "example":
        return example_set(_get(spec, "m", int, required=True),
                           _get(spec, "k", int, required=True),
                           _get(spec, "n", int, required=True),
                           _get(spec, "l_max", int, required=True))
    if kind == "digit-constraint":
        return digit_constraint_set(_get(spec, "period", int, required=True),
                                    _get(spec, "fixed", _fixed, required=True),
                                    _get(spec, "build_depth", int, required=True))
    if kind == "even-digits-zero":
        return even_digits_zero(_get(spec, "build_depth", int, required=True))
    if kind == "full":
        return full_set(_get(spec, "build_depth", int, required=True))
    raise InvalidArgument(f"field 'kind': unknown set kind {kind!r} "
                          f"(expected one of {', '.join(SET_KINDS)})")
