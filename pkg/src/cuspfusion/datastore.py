"""The two provider databases, their join, and exact CSV persistence.

File schemas (header row, comma separated, LF line endings)::

    db_a.csv        id,a
    db_b.csv        id,b,y
    joined.csv      id,a,b,y
    scoring.csv     id,a,b
    population.csv  id,a,b,x0,x,p,y

Floats are written with ``repr`` (shortest string that parses back to the
same double), integers as plain decimals.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError

SCHEMAS = {
    "db_a": ("id", "a"),
    "db_b": ("id", "b", "y"),
    "joined": ("id", "a", "b", "y"),
    "scoring": ("id", "a", "b"),
    "population": ("id", "a", "b", "x0", "x", "p", "y"),
}
INT_COLUMNS = frozenset({"id", "y"})


@dataclass(frozen=True)
class DbTable:
    """Immutable keyed table; ``rows`` are tuples in column order, sorted by id."""

    name: str
    columns: tuple
    rows: tuple = ()
    key_column: str = "id"

    def __post_init__(self):
        if not self.columns or self.columns[0] != self.key_column:
            raise SchemaError(f"{self.name}: first column must be {self.key_column!r}")
        ids = [r[0] for r in self.rows]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"{self.name}: duplicate ids")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise SchemaError(f"{self.name}: row {r!r} does not match {self.columns}")

    def __len__(self):
        return len(self.rows)

    @property
    def ids(self):
        return [r[0] for r in self.rows]

    def column(self, name):
        try:
            j = self.columns.index(name)
        except ValueError:
            raise SchemaError(f"{self.name}: no column {name!r}") from None
        dtype = int if name in INT_COLUMNS else float
        return np.array([r[j] for r in self.rows], dtype=dtype)

    def project(self, columns, name=None):
        idx = [self.columns.index(c) for c in columns]
        return DbTable(name or self.name, tuple(columns), tuple(tuple(r[j] for j in idx) for r in self.rows))


def _cell(name, value):
    return int(value) if name in INT_COLUMNS else float(value)


def make_table(name, columns, records):
    """Build a table from dict-like or attribute records, sorted by id."""
    rows = []
    for rec in records:
        get = rec.__getitem__ if isinstance(rec, dict) else rec.__getattribute__
        rows.append(tuple(_cell(c, get(c)) for c in columns))
    rows.sort(key=lambda r: r[0])
    return DbTable(name, tuple(columns), tuple(rows))


def population_table(population):
    return make_table("population", SCHEMAS["population"], population)


def split(population):
    """Project a population onto the two provider databases.

    The vote lives with the platform's survey (db_b); latent x, x0 and p are
    never exported.
    """
    if not population:
        raise ValueError("population is empty")
    return (
        make_table("db_a", SCHEMAS["db_a"], population),
        make_table("db_b", SCHEMAS["db_b"], population),
    )


def join(db_a: DbTable, db_b: DbTable) -> DbTable:
    """Inner join on id, ascending id order.

    Gives the training schema (id, a, b, y) when db_b carries votes and the
    scoring schema (id, a, b) otherwise.
    """
    for table, needed in ((db_a, ("id", "a")), (db_b, ("id", "b"))):
        missing = [c for c in needed if c not in table.columns]
        if missing:
            raise SchemaError(f"{table.name}: missing columns {missing}")
    ia = db_a.columns.index("a")
    ib = db_b.columns.index("b")
    with_y = "y" in db_b.columns
    iy = db_b.columns.index("y") if with_y else None
    right = {r[0]: r for r in db_b.rows}
    rows = []
    for r in db_a.rows:
        other = right.get(r[0])
        if other is None:
            continue
        row = (r[0], r[ia], other[ib]) + ((other[iy],) if with_y else ())
        rows.append(row)
    rows.sort(key=lambda r: r[0])
    name = "joined" if with_y else "scoring"
    return DbTable(name, SCHEMAS[name], tuple(rows))


def _format(name, value):
    return str(int(value)) if name in INT_COLUMNS else repr(float(value))


def export_csv(table: DbTable, path):
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_format(c, v) for c, v in zip(table.columns, row)))
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def import_csv(path, schema, name=None):
    """Read a table whose header must equal ``schema`` exactly.

    ``schema`` is a key of SCHEMAS or an explicit tuple of column names.
    """
    if isinstance(schema, str):
        name = name or schema
        schema = SCHEMAS[schema]
    schema = tuple(schema)
    name = name or Path(path).stem
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("missing header", line=1)
    header = tuple(lines[0].split(","))
    if header != schema:
        raise SchemaError(f"header {','.join(header)!r} does not match {','.join(schema)!r}")

    rows, seen = [], set()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(schema):
            raise ParseError(f"expected {len(schema)} fields, got {len(fields)}", line=lineno)
        try:
            row = tuple(
                int(f) if c in INT_COLUMNS else float(f) for c, f in zip(schema, fields)
            )
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if row[0] in seen:
            raise ParseError(f"duplicate id {row[0]}", line=lineno)
        seen.add(row[0])
        rows.append(row)
    rows.sort(key=lambda r: r[0])
    return DbTable(name, schema, tuple(rows))
