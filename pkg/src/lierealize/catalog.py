"""Database of the classified realizations, loaded from a versioned text file."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from .algebra import ALGEBRAS, AlgebraTag, RealizationReport, verify_realization
from .liefield import VectorField
from .parser import parse_field, parse_expr

__all__ = [
    "CatalogError",
    "RealizationEntry",
    "EntryReport",
    "load_catalog",
    "list_catalog",
    "get_entry",
    "instantiate",
    "verify_entry",
    "verify_all",
]


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class RealizationEntry:
    algebra: AlgebraTag
    index: int
    n_min: int
    params: Mapping[str, tuple[Fraction, ...]]
    fields: tuple[str, ...]
    source_line: int = 0

    @property
    def name(self) -> str:
        return f"R({self.algebra.value},{self.index})"

    def param_assignments(self) -> list[dict[str, Fraction]]:
        names = sorted(self.params)
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.params[p] for p in names))]

    def describe(self) -> dict:
        return {
            "algebra": self.algebra.value,
            "index": self.index,
            "n_min": self.n_min,
            "params": {p: [str(v) for v in vals] for p, vals in self.params.items()},
            "fields": list(self.fields),
        }

    def instantiate(self, n: int | None = None, params: Mapping[str, object] | None = None) -> list[VectorField]:
        n = self.n_min if n is None else n
        if n < self.n_min:
            raise CatalogError(f"{self.name} needs n >= {self.n_min}, got {n}")
        params = dict(params or {})
        unknown = set(params) - set(self.params)
        if unknown:
            raise CatalogError(f"{self.name} has no parameter(s) {sorted(unknown)}")
        values = {}
        for p, allowed in self.params.items():
            if p not in params:
                raise CatalogError(f"{self.name} needs a value for {p} (one of {[str(a) for a in allowed]})")
            v = Fraction(params[p])
            if v not in allowed:
                raise CatalogError(f"{p} = {v} is outside {[str(a) for a in allowed]} for {self.name}")
            values[p] = v
        out = []
        for text in self.fields:
            f = parse_field(text, n)
            out.append(f.subs_params(values) if values else f)
        return out


def _parse_params(text: str, lineno: int) -> dict[str, tuple[Fraction, ...]]:
    params: dict[str, tuple[Fraction, ...]] = {}
    text = text.strip()
    if not text:
        return params
    for chunk in text.split(";"):
        name, sep, values = chunk.partition("=")
        if not sep:
            raise CatalogError(f"line {lineno}: parameter spec must read 'name = v1, v2, ...'")
        vals = []
        for v in values.split(","):
            expr = parse_expr(v.strip(), 0, line=lineno)
            vals.append(expr.constant_value())
        params[name.strip()] = tuple(vals)
    return params


def parse_catalog(text: str) -> list[RealizationEntry]:
    entries: list[RealizationEntry] = []
    block: dict = {}
    start = 0

    def flush():
        if not block:
            return
        missing = {"algebra", "index", "n_min", "fields"} - set(block)
        if missing:
            raise CatalogError(f"entry starting at line {start} lacks {sorted(missing)}")
        try:
            tag = AlgebraTag(block["algebra"])
        except ValueError:
            raise CatalogError(f"line {start}: unknown algebra {block['algebra']!r}") from None
        entry = RealizationEntry(
            tag, int(block["index"]), int(block["n_min"]), block.get("params", {}),
            tuple(t for t, _ in block["fields"]), start,
        )
        for t, lineno in block["fields"]:
            parse_field(t, entry.n_min, line=lineno)  # surface transcription errors at load
        entries.append(entry)
        block.clear()

    in_fields = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if line.lstrip().startswith("#"):
            continue
        if not line.strip():
            flush()
            in_fields = False
            continue
        if in_fields and raw[:1].isspace():
            block["fields"].append((line.strip(), lineno))
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise CatalogError(f"line {lineno}: expected 'key: value'")
        key = key.strip()
        if not block:
            start = lineno
        if key == "fields":
            block["fields"] = []
            in_fields = True
        elif key == "params":
            block["params"] = _parse_params(value, lineno)
            in_fields = False
        elif key in ("algebra", "index", "n_min"):
            block[key] = value.strip()
            in_fields = False
        else:
            raise CatalogError(f"line {lineno}: unknown key {key!r}")
    flush()
    return entries


def _default_text() -> str:
    return resources.files("lierealize").joinpath("data/realizations.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _load_default() -> tuple[RealizationEntry, ...]:
    return tuple(parse_catalog(_default_text()))


def load_catalog(path: str | Path | None = None) -> list[RealizationEntry]:
    if path is None:
        return list(_load_default())
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


def list_catalog(algebra: AlgebraTag | str | None = None) -> list[RealizationEntry]:
    entries = load_catalog()
    if algebra is not None:
        entries = [e for e in entries if e.algebra == AlgebraTag(algebra)]
    return entries


def get_entry(algebra: AlgebraTag | str, index: int) -> RealizationEntry:
    try:
        tag = AlgebraTag(algebra)
    except ValueError:
        raise CatalogError(f"unknown algebra {algebra!r}") from None
    for e in load_catalog():
        if e.algebra == tag and e.index == index:
            return e
    raise CatalogError(f"no catalog entry R({tag.value},{index})")


def instantiate(algebra, index: int, n: int | None = None, params=None) -> list[VectorField]:
    return get_entry(algebra, index).instantiate(n, params)


@dataclass
class EntryReport:
    entry: RealizationEntry
    n: int
    params: dict
    report: RealizationReport

    @property
    def ok(self) -> bool:
        return self.report.ok

    def describe(self) -> dict:
        return {
            "entry": self.entry.name,
            "n": self.n,
            "params": {k: str(v) for k, v in self.params.items()},
            "status": "ok" if self.ok else "fail",
            "discrepancy": None if self.ok else {
                "printed_fields": list(self.entry.fields),
                "detail": str(self.report),
            },
        }


def verify_entry(entry: RealizationEntry, n: int | None = None, params=None, rng=None) -> EntryReport:
    n = entry.n_min if n is None else n
    params = dict(params or {})
    fields = entry.instantiate(n, params)
    return EntryReport(entry, n, params, verify_realization(fields, ALGEBRAS[entry.algebra], rng))


def verify_all(extra_vars=(0, 1), rng=None) -> list[EntryReport]:
    """Every entry, every admissible parameter value, n = n_min + each of ``extra_vars``."""
    out = []
    for entry in load_catalog():
        for params in entry.param_assignments():
            for k in extra_vars:
                out.append(verify_entry(entry, entry.n_min + k, params, rng))
    return out
