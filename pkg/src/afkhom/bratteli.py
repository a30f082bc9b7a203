"""Bratteli diagrams: data model, validation, presets, serialization.

A diagram is a sequence of levels; level n carries the block dimension
vector d_n of a finite-dimensional matrix-block algebra, and consecutive
levels are connected by a non-negative integer multiplicity matrix M_n of
shape k_{n+1} x k_n.  Unital embeddings force d_{n+1} = M_n d_n, and every
M_n must have no zero row (each upper block receives at least one strand).

Level 0 is the one-block, dimension-1 algebra (the scalars) for all
presets; explicit diagrams and stationary diagrams with several blocks may
override the bottom level.

Three kinds are supported:

* ``explicit``   — finite data, exactly as given; asking for more levels is
                   an error, never an extrapolation.
* ``stationary`` — one constant square multiplicity matrix, materialized
                   lazily to any requested depth.
* ``uhf``        — 1x1 multiplicity matrices given by a list of integer
                   factors; with ``repeat_tail`` the factor list repeats
                   cyclically forever.

The file format is a JSON object, e.g.::

    { "name": "CAR", "kind": "stationary", "matrix": [[2]], "depth": 32 }
    { "name": "X", "kind": "explicit", "dims": [[1],[2],[4]], "maps": [[[2]],[[2]]] }
    { "name": "UHF6", "kind": "uhf", "factors": [6], "repeat_tail": true }

Matrices are row-major lists of rows; map n has k_{n+1} rows and k_n
columns.  ``parse_diagram`` / ``serialize_diagram`` round-trip exactly.

The same module derives the two towers of free abelian groups a diagram
induces: the covariant tower (classes of projections, connecting maps M_n)
and the contravariant dual tower (connecting maps M_n transposed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exactlin import IntMatrix, ShapeError

EXPLICIT = "explicit"
STATIONARY = "stationary"
UHF = "uhf"
_KINDS = (EXPLICIT, STATIONARY, UHF)

COVARIANT = "covariant"
CONTRAVARIANT = "contravariant"


class DiagramError(ValueError):
    pass


class DepthError(DiagramError):
    """Requested levels beyond what the diagram kind can provide."""


class DiagramFormatError(DiagramError):
    """Malformed diagram text or object."""


class DiagramValidationError(DiagramError):
    """Structurally parsable diagram that violates a diagram invariant."""

    def __init__(self, report: "ValidationReport"):
        super().__init__(report.message)
        self.report = report


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    code: str | None = None    # dimension-mismatch | zero-row | non-positive-dimension | negative-multiplicity
    level: int | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def to_obj(self) -> dict:
        return {"ok": self.ok, "code": self.code, "level": self.level, "message": self.message}


@dataclass(frozen=True)
class BratteliDiagram:
    name: str
    kind: str
    dims: tuple[tuple[int, ...], ...]
    maps: tuple[IntMatrix, ...]
    matrix: IntMatrix | None = None           # stationary payload
    factors: tuple[int, ...] | None = None    # uhf payload
    repeat_tail: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise DiagramError(f"unknown diagram kind {self.kind!r}")
        if len(self.dims) != len(self.maps) + 1:
            raise DiagramError("a diagram with n maps must have n+1 levels")
        if self.kind == STATIONARY and self.matrix is None:
            raise DiagramError("stationary diagram needs its matrix")
        if self.kind == UHF and self.factors is None:
            raise DiagramError("uhf diagram needs its factor list")

    @property
    def depth(self) -> int:
        """Number of materialized multiplicity matrices."""
        return len(self.maps)

    @property
    def levels(self) -> int:
        return len(self.dims)

    @property
    def has_tail(self) -> bool:
        """True when the kind guarantees the diagram continues forever."""
        return self.kind == STATIONARY or (self.kind == UHF and self.repeat_tail)

    def block_count(self, level: int) -> int:
        self._check_level(level)
        return len(self.dims[level])

    def block_dims(self, level: int) -> tuple[int, ...]:
        self._check_level(level)
        return self.dims[level]

    def _check_level(self, level: int) -> None:
        if not 0 <= level < self.levels:
            raise DepthError(f"level {level} outside materialized range 0..{self.levels - 1}")

    def materialized(self, depth: int) -> "BratteliDiagram":
        """Return a diagram with at least ``depth`` maps.

        Stationary and repeating-uhf kinds extend by their rule; other
        kinds raise ``DepthError`` rather than invent data.
        """
        if depth <= self.depth:
            return self
        if self.kind == STATIONARY:
            dims = list(self.dims)
            maps = list(self.maps)
            for _ in range(self.depth, depth):
                dims.append(self.matrix.matvec(dims[-1]))
                maps.append(self.matrix)
            return BratteliDiagram(self.name, self.kind, tuple(dims), tuple(maps),
                                   matrix=self.matrix)
        if self.kind == UHF and self.repeat_tail:
            dims = list(self.dims)
            maps = list(self.maps)
            cycle = self.factors
            for n in range(self.depth, depth):
                f = cycle[n % len(cycle)]
                dims.append((dims[-1][0] * f,))
                maps.append(IntMatrix.from_rows([[f]]))
            return BratteliDiagram(self.name, self.kind, tuple(dims), tuple(maps),
                                   factors=self.factors, repeat_tail=True)
        raise DepthError(
            f"{self.kind} diagram {self.name!r} has depth {self.depth}; "
            f"requested {depth} and no tail rule applies")


def explicit_diagram(dims: Iterable[Iterable[int]], maps: Iterable[Iterable[Iterable[int]]],
                     name: str = "explicit") -> BratteliDiagram:
    dims_t = tuple(tuple(int(x) for x in level) for level in dims)
    maps_t = tuple(IntMatrix.from_rows(m) for m in maps)
    return BratteliDiagram(name, EXPLICIT, dims_t, maps_t)


def stationary_diagram(matrix: Iterable[Iterable[int]], depth: int,
                       dims0: Iterable[int] | None = None,
                       name: str = "stationary") -> BratteliDiagram:
    mat = matrix if isinstance(matrix, IntMatrix) else IntMatrix.from_rows(matrix)
    if not mat.is_square():
        raise DiagramError("stationary multiplicity matrix must be square")
    if depth < 0:
        raise DiagramError("depth must be non-negative")
    if dims0 is None:
        d0 = tuple(1 for _ in range(mat.rows))
    else:
        d0 = tuple(int(x) for x in dims0)
    dims = [d0]
    for _ in range(depth):
        dims.append(mat.matvec(dims[-1]))
    return BratteliDiagram(name, STATIONARY, tuple(dims), (mat,) * depth, matrix=mat)


def car(depth: int) -> BratteliDiagram:
    """The doubling diagram: d_0 = [1], d_n = [2^n], every map [[2]]."""
    if depth < 1:
        raise DiagramError("depth must be at least 1")
    return stationary_diagram([[2]], depth, name="CAR")


def uhf(factors: Sequence[int], repeat_tail: bool = False,
        name: str | None = None) -> BratteliDiagram:
    """One-block diagram with 1x1 multiplicity matrices.

    With ``repeat_tail`` the factor list repeats cyclically forever (so
    uhf([2], repeat_tail=True) is the doubling diagram up to naming, and
    uhf([2, 3], repeat_tail=True) keeps alternating 2, 3, 2, 3, ...).
    """
    facts = tuple(int(f) for f in factors)
    if not facts:
        raise DiagramError("at least one factor required")
    for f in facts:
        if f < 1:
            raise DiagramError(f"factor {f} < 1")
    dims = [(1,)]
    for f in facts:
        dims.append((dims[-1][0] * f,))
    if name is None:
        name = "UHF(" + ",".join(str(f) for f in facts) + ("+" if repeat_tail else "") + ")"
    return BratteliDiagram(name, UHF, tuple(dims),
                           tuple(IntMatrix.from_rows([[f]]) for f in facts),
                           factors=facts, repeat_tail=repeat_tail)


def validate(diagram: BratteliDiagram) -> ValidationReport:
    """Check the diagram invariants; report the first violation found.

    Scan order is by level: dimensions first, then the multiplicity matrix
    leaving that level (shape, entry signs, zero rows, unitality).
    """
    for n in range(diagram.levels):
        d = diagram.dims[n]
        if len(d) == 0 or any(x <= 0 for x in d):
            return ValidationReport(False, "non-positive-dimension", n,
                                    f"level {n} dimension vector {list(d)} is not positive")
        if n >= diagram.depth:
            continue
        m = diagram.maps[n]
        d_next = diagram.dims[n + 1]
        if m.rows != len(d_next) or m.cols != len(d):
            return ValidationReport(
                False, "dimension-mismatch", n,
                f"map {n} has shape {m.rows}x{m.cols}, expected {len(d_next)}x{len(d)}")
        if any(x < 0 for row in m.entries for x in row):
            return ValidationReport(False, "negative-multiplicity", n,
                                    f"map {n} has a negative entry")
        for i, row in enumerate(m.entries):
            if all(x == 0 for x in row):
                return ValidationReport(False, "zero-row", n,
                                        f"map {n} row {i} is zero: block receives no strand")
        if m.matvec(d) != d_next:
            return ValidationReport(
                False, "dimension-mismatch", n,
                f"unitality fails at level {n}: M_{n} d_{n} = {list(m.matvec(d))} "
                f"but d_{n + 1} = {list(d_next)}")
    return ValidationReport(True, message="all invariants hold")


# ---------------------------------------------------------------------------
# Towers


@dataclass(frozen=True)
class TowerTail:
    """Guaranteed continuation of a tower beyond its materialized steps."""

    kind: str                                # "stationary" | "cyclic"
    matrix: IntMatrix | None = None          # constant step, tower orientation
    factors: tuple[int, ...] | None = None   # repeating 1x1 factors

    def __post_init__(self) -> None:
        if self.kind == "stationary":
            if self.matrix is None or not self.matrix.is_square():
                raise DiagramError("stationary tail needs a square matrix")
        elif self.kind == "cyclic":
            if not self.factors:
                raise DiagramError("cyclic tail needs factors")
            if any(f < 1 for f in self.factors):
                raise DiagramError("cyclic tail factors must be >= 1")
        else:
            raise DiagramError(f"unknown tail kind {self.kind!r}")

    def factor_cycle(self) -> tuple[int, ...]:
        """The repeating factor list for rank-one tails."""
        if self.kind == "cyclic":
            return self.factors
        if self.matrix.rows == 1:
            return (self.matrix.entry(0, 0),)
        raise DiagramError("tail is not rank one")


@dataclass(frozen=True)
class Tower:
    """Tower of free abelian groups Z^{k_0}, Z^{k_1}, ... with integer steps.

    ``steps[i]`` connects levels i and i+1: for a covariant tower it maps
    Z^{k_i} -> Z^{k_{i+1}} (shape k_{i+1} x k_i); for a contravariant tower
    it maps Z^{k_{i+1}} -> Z^{k_i} (shape k_i x k_{i+1}).  A ``tail``
    certifies that the steps continue forever by the stated rule; a tower
    without a tail is finite, i.e. constant beyond its top level.
    """

    direction: str
    ranks: tuple[int, ...]
    steps: tuple[IntMatrix, ...]
    tail: TowerTail | None = None

    def __post_init__(self) -> None:
        if self.direction not in (COVARIANT, CONTRAVARIANT):
            raise DiagramError(f"unknown direction {self.direction!r}")
        if len(self.ranks) != len(self.steps) + 1:
            raise DiagramError("a tower with n steps must have n+1 ranks")
        for i, s in enumerate(self.steps):
            lo, hi = self.ranks[i], self.ranks[i + 1]
            want = (hi, lo) if self.direction == COVARIANT else (lo, hi)
            if (s.rows, s.cols) != want:
                raise ShapeError(f"step {i} has shape {s.rows}x{s.cols}, expected {want}")
        if self.tail is not None:
            k = self.ranks[-1]
            if self.tail.kind == "stationary" and self.tail.matrix.rows != k:
                raise ShapeError("stationary tail size does not match top rank")
            if self.tail.kind == "cyclic" and k != 1:
                raise ShapeError("cyclic tail requires a rank-one tower")

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def is_rank_one(self) -> bool:
        return all(k == 1 for k in self.ranks)

    def step_factor(self, i: int) -> int:
        return self.steps[i].entry(0, 0)

    def composite_up(self, lo: int, hi: int) -> IntMatrix:
        """Covariant composite Z^{k_lo} -> Z^{k_hi}."""
        if self.direction != COVARIANT:
            raise DiagramError("composite_up needs a covariant tower")
        out = IntMatrix.identity(self.ranks[lo])
        for i in range(lo, hi):
            out = self.steps[i] @ out
        return out

    def composite_down(self, hi: int, lo: int) -> IntMatrix:
        """Contravariant composite Z^{k_hi} -> Z^{k_lo}."""
        if self.direction != CONTRAVARIANT:
            raise DiagramError("composite_down needs a contravariant tower")
        out = IntMatrix.identity(self.ranks[hi])
        for i in range(hi - 1, lo - 1, -1):
            out = self.steps[i] @ out
        return out

    def to_obj(self) -> dict:
        obj = {
            "direction": self.direction,
            "ranks": list(self.ranks),
            "steps": [[list(r) for r in s.entries] for s in self.steps],
        }
        if self.tail is None:
            obj["tail"] = None
        elif self.tail.kind == "stationary":
            obj["tail"] = {"kind": "stationary",
                           "matrix": [list(r) for r in self.tail.matrix.entries]}
        else:
            obj["tail"] = {"kind": "cyclic", "factors": list(self.tail.factors)}
        return obj


def _diagram_tail(diagram: BratteliDiagram, transpose: bool) -> TowerTail | None:
    if diagram.kind == STATIONARY:
        mat = diagram.matrix.transpose() if transpose else diagram.matrix
        return TowerTail("stationary", matrix=mat)
    if diagram.kind == UHF and diagram.repeat_tail:
        return TowerTail("cyclic", factors=diagram.factors)
    return None


def k0_tower(diagram: BratteliDiagram, depth: int) -> Tower:
    """Covariant tower of projection-class groups: steps are the
    multiplicity matrices themselves."""
    if depth > diagram.depth:
        raise DepthError(f"depth {depth} exceeds materialized depth {diagram.depth}")
    ranks = tuple(len(diagram.dims[n]) for n in range(depth + 1))
    return Tower(COVARIANT, ranks, diagram.maps[:depth],
                 tail=_diagram_tail(diagram, transpose=False))


def khomology_tower(diagram: BratteliDiagram, depth: int) -> Tower:
    """Contravariant dual tower: step n is the transpose of map n, pulling
    level n+1 block generators down to level n."""
    if depth > diagram.depth:
        raise DepthError(f"depth {depth} exceeds materialized depth {diagram.depth}")
    ranks = tuple(len(diagram.dims[n]) for n in range(depth + 1))
    return Tower(CONTRAVARIANT, ranks, tuple(m.transpose() for m in diagram.maps[:depth]),
                 tail=_diagram_tail(diagram, transpose=True))


def zero_tower(depth: int, with_tail: bool) -> Tower:
    """The identically-zero contravariant tower (all groups trivial)."""
    zmat = IntMatrix.zeros(0, 0)
    tail = TowerTail("stationary", matrix=zmat) if with_tail else None
    return Tower(CONTRAVARIANT, (0,) * (depth + 1), (zmat,) * depth, tail=tail)


# ---------------------------------------------------------------------------
# Serialization


def _matrix_rows(obj, what: str) -> list[list[int]]:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise DiagramFormatError(f"{what} must be a list of rows")
    widths = {len(r) for r in obj}
    if len(widths) > 1:
        raise DiagramFormatError(f"{what} has rows of different lengths {sorted(widths)}")
    for r in obj:
        for x in r:
            if not isinstance(x, int) or isinstance(x, bool):
                raise DiagramFormatError(f"{what} entries must be integers, got {x!r}")
    return obj


def diagram_from_obj(obj) -> BratteliDiagram:
    if not isinstance(obj, dict):
        raise DiagramFormatError("diagram file must contain a JSON object")
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise DiagramFormatError(f"unknown or missing kind {kind!r}")
    name = obj.get("name", kind)
    if not isinstance(name, str):
        raise DiagramFormatError("name must be a string")
    try:
        if kind == EXPLICIT:
            if "dims" not in obj or "maps" not in obj:
                raise DiagramFormatError("explicit diagram needs dims and maps")
            dims = obj["dims"]
            if not isinstance(dims, list) or not all(isinstance(d, list) for d in dims):
                raise DiagramFormatError("dims must be a list of dimension vectors")
            maps = [_matrix_rows(m, f"map {i}") for i, m in enumerate(obj["maps"])]
            return explicit_diagram(dims, maps, name=name)
        if kind == STATIONARY:
            if "matrix" not in obj or "depth" not in obj:
                raise DiagramFormatError("stationary diagram needs matrix and depth")
            depth = obj["depth"]
            if not isinstance(depth, int) or depth < 0:
                raise DiagramFormatError("depth must be a non-negative integer")
            dims0 = obj.get("dims0")
            return stationary_diagram(_matrix_rows(obj["matrix"], "matrix"), depth,
                                      dims0=dims0, name=name)
        factors = obj.get("factors")
        if not isinstance(factors, list) or not factors:
            raise DiagramFormatError("uhf diagram needs a non-empty factor list")
        repeat = obj.get("repeat_tail", False)
        if not isinstance(repeat, bool):
            raise DiagramFormatError("repeat_tail must be a boolean")
        d = uhf(factors, repeat_tail=repeat, name=name)
        depth = obj.get("depth")
        if depth is not None:
            if not isinstance(depth, int) or depth < len(factors):
                raise DiagramFormatError("uhf depth must be an integer >= len(factors)")
            d = d.materialized(depth)
        return d
    except (ShapeError, TypeError, DiagramError) as exc:
        if isinstance(exc, DiagramFormatError):
            raise
        raise DiagramFormatError(str(exc)) from exc


def diagram_to_obj(diagram: BratteliDiagram) -> dict:
    if diagram.kind == EXPLICIT:
        return {
            "name": diagram.name,
            "kind": EXPLICIT,
            "dims": [list(d) for d in diagram.dims],
            "maps": [[list(r) for r in m.entries] for m in diagram.maps],
        }
    if diagram.kind == STATIONARY:
        obj = {
            "name": diagram.name,
            "kind": STATIONARY,
            "matrix": [list(r) for r in diagram.matrix.entries],
            "depth": diagram.depth,
        }
        default0 = tuple(1 for _ in range(diagram.matrix.rows))
        if diagram.dims[0] != default0:
            obj["dims0"] = list(diagram.dims[0])
        return obj
    obj = {
        "name": diagram.name,
        "kind": UHF,
        "factors": list(diagram.factors),
        "repeat_tail": diagram.repeat_tail,
    }
    if diagram.depth != len(diagram.factors):
        obj["depth"] = diagram.depth
    return obj


def parse_diagram(text: str) -> BratteliDiagram:
    """Parse and validate a diagram from its JSON text form."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramFormatError(
            f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    diagram = diagram_from_obj(obj)
    report = validate(diagram)
    if not report.ok:
        raise DiagramValidationError(report)
    return diagram


def serialize_diagram(diagram: BratteliDiagram) -> str:
    return json.dumps(diagram_to_obj(diagram), indent=2)


def preset(source: str, horizon: int) -> BratteliDiagram | None:
    """Resolve a preset name: "car" or "uhf:<comma-list>[+]".

    Returns None when ``source`` is not a preset (the caller should then
    treat it as a file path).  Presets with a tail are materialized to the
    given horizon.
    """
    if source == "car":
        return car(max(horizon, 1))
    if source.startswith("uhf:"):
        body = source[len("uhf:"):]
        repeat = body.endswith("+")
        if repeat:
            body = body[:-1]
        try:
            factors = [int(part) for part in body.split(",") if part != ""]
        except ValueError as exc:
            raise DiagramFormatError(f"bad uhf preset {source!r}: {exc}") from exc
        if not factors:
            raise DiagramFormatError(f"bad uhf preset {source!r}: no factors")
        d = uhf(factors, repeat_tail=repeat)
        if repeat:
            d = d.materialized(max(horizon, len(factors)))
        return d
    return None
