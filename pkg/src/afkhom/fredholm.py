"""Even Fredholm modules over matrix-block algebras, exactly.

A module is a graded space C^d (+) C^d carrying a representation
pi = rep (+) 0, a symmetry F with F = F^T and F^2 = 1, and a grading gamma
with gamma^2 = 1, gamma F = -F gamma, gamma pi(a) = pi(a) gamma.  The
canonical generator of the even dual group of a block is the module whose
representation extracts that block, with

    F = [[0, 1], [1, 0]],   gamma = [[1, 0], [0, -1]]

in d x d quadrants.  All matrices are exact rationals; the pairing with a
projection class is computed from the multilinear trace functional

    psi_{2k}(a_0, ..., a_{2k})
        = (-1)^{k(2k-1)} k! Tr(gamma pi(a_0) [F, pi(a_1)] ... [F, pi(a_{2k})])

normalized by k!.  For projections the normalized value is independent of
k; the implementation evaluates at k and k+1 and refuses to answer if the
two disagree (which would indicate a bug, never rounding: there is no
rounding here).

Dual classes are bookkept as integer block-weight vectors; the block
duality and pairing-naturality property tests justify that bookkeeping
operationally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Sequence

from .bratteli import BratteliDiagram
from .exactlin import QMatrix

# exhaustive homomorphism checking is quadratic in the number of matrix
# units; above this total unit count a deterministic sample is used
_EXHAUSTIVE_UNIT_BUDGET = 300
_BRUTE_FORCE_WITNESS_DIM = 8


class LevelMismatchError(ValueError):
    pass


class ArityError(ValueError):
    pass


class NotAProjectionError(ValueError):
    pass


class KInstabilityError(RuntimeError):
    """The k and k+1 pairing values disagree (implementation bug guard)."""


class UnrealizableClassError(ValueError):
    """Class vector cannot be realized as a diagonal projection."""


@dataclass(frozen=True)
class AlgebraElement:
    """Element of the level-n algebra: one square rational block per block."""

    level: int
    blocks: tuple[QMatrix, ...]

    def __post_init__(self) -> None:
        for b in self.blocks:
            if b.rows != b.cols:
                raise ValueError("algebra blocks must be square")

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(b.rows for b in self.blocks)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._compatible(other)
        return AlgebraElement(self.level, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._compatible(other)
        return AlgebraElement(self.level, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._compatible(other)
        return AlgebraElement(self.level, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def scaled(self, c) -> "AlgebraElement":
        return AlgebraElement(self.level, tuple(b.scaled(c) for b in self.blocks))

    def transpose(self) -> "AlgebraElement":
        return AlgebraElement(self.level, tuple(b.transpose() for b in self.blocks))

    def is_projection(self) -> bool:
        return all(b @ b == b and b.transpose() == b for b in self.blocks)

    def _compatible(self, other: "AlgebraElement") -> None:
        if self.level != other.level or self.block_dims != other.block_dims:
            raise LevelMismatchError("algebra elements live at different levels")


def _check_level(diagram: BratteliDiagram, level: int) -> tuple[int, ...]:
    return diagram.block_dims(level)


def algebra_element(diagram: BratteliDiagram, level: int, blocks) -> AlgebraElement:
    dims = _check_level(diagram, level)
    qblocks = tuple(b if isinstance(b, QMatrix) else QMatrix.from_rows(b) for b in blocks)
    if tuple(b.rows for b in qblocks) != dims:
        raise ValueError(f"block sizes {[b.rows for b in qblocks]} do not match dims {list(dims)}")
    return AlgebraElement(level, qblocks)


def zero_element(diagram: BratteliDiagram, level: int) -> AlgebraElement:
    dims = _check_level(diagram, level)
    return AlgebraElement(level, tuple(QMatrix.zeros(d, d) for d in dims))


def unit_element(diagram: BratteliDiagram, level: int) -> AlgebraElement:
    dims = _check_level(diagram, level)
    return AlgebraElement(level, tuple(QMatrix.identity(d) for d in dims))


def minimal_projection(diagram: BratteliDiagram, level: int, block: int) -> AlgebraElement:
    """Rank-one diagonal projection supported in one block."""
    dims = _check_level(diagram, level)
    if not 0 <= block < len(dims):
        raise IndexError(f"block {block} outside 0..{len(dims) - 1}")
    blocks = [QMatrix.zeros(d, d) for d in dims]
    blocks[block] = QMatrix(dims[block], dims[block], {(0, 0): Fraction(1)})
    return AlgebraElement(level, tuple(blocks))


def matrix_unit(diagram: BratteliDiagram, level: int, block: int, i: int, j: int) -> AlgebraElement:
    dims = _check_level(diagram, level)
    blocks = [QMatrix.zeros(d, d) for d in dims]
    blocks[block] = QMatrix(dims[block], dims[block], {(i, j): Fraction(1)})
    return AlgebraElement(level, tuple(blocks))


def diagonal_projection(diagram: BratteliDiagram, level: int, ranks: Sequence[int]) -> AlgebraElement:
    """Projection with the given rank in each block (leading diagonal 1s)."""
    dims = _check_level(diagram, level)
    if len(ranks) != len(dims):
        raise UnrealizableClassError(
            f"class vector length {len(ranks)} does not match {len(dims)} blocks")
    blocks = []
    for r, d in zip(ranks, dims):
        if not 0 <= r <= d:
            raise UnrealizableClassError(f"rank {r} not realizable in a block of dimension {d}")
        blocks.append(QMatrix(d, d, {(i, i): Fraction(1) for i in range(r)}))
    return AlgebraElement(level, tuple(blocks))


def embed(diagram: BratteliDiagram, a: AlgebraElement) -> AlgebraElement:
    """Apply the unital diagram embedding, one level up.

    Block j of the image is the block-diagonal sum of M[j][i] copies of
    block i, for i ascending.
    """
    m = diagram.maps[a.level] if a.level < diagram.depth else None
    if m is None:
        raise LevelMismatchError(f"no embedding materialized at level {a.level}")
    dims_lo = diagram.block_dims(a.level)
    if a.block_dims != dims_lo:
        raise LevelMismatchError("element does not match the diagram at its level")
    dims_hi = diagram.block_dims(a.level + 1)
    out_blocks = []
    for j in range(len(dims_hi)):
        data = {}
        offset = 0
        for i, d in enumerate(dims_lo):
            copies = m.entry(j, i)
            for _ in range(copies):
                for (r, c), val in a.blocks[i].items():
                    data[(offset + r, offset + c)] = val
                offset += d
        if offset != dims_hi[j]:
            raise LevelMismatchError("embedding does not fill the target block")
        out_blocks.append(QMatrix(dims_hi[j], dims_hi[j], data))
    return AlgebraElement(a.level + 1, tuple(out_blocks))


# ---------------------------------------------------------------------------
# Modules


def _canonical_f(d: int) -> QMatrix:
    data = {}
    for i in range(d):
        data[(i, d + i)] = Fraction(1)
        data[(d + i, i)] = Fraction(1)
    return QMatrix(2 * d, 2 * d, data)


def _canonical_gamma(d: int) -> QMatrix:
    data = {}
    for i in range(d):
        data[(i, i)] = Fraction(1)
        data[(d + i, d + i)] = Fraction(-1)
    return QMatrix(2 * d, 2 * d, data)


@dataclass(frozen=True, eq=False)
class EvenFredholmModule:
    """Graded module (C^d (+) C^d, rep (+) 0, F, gamma) over a level algebra.

    ``block_weights`` records how many copies of each block's standard
    representation make up ``rep``; the Chern pairing against the class of
    a projection equals the weight vector dotted with the block ranks, a
    fact the property suite verifies rather than assumes.
    """

    level: int
    dims: tuple[int, ...]
    dim: int
    rep: Callable[[AlgebraElement], QMatrix]
    f: QMatrix
    gamma: QMatrix
    block_weights: tuple[int, ...]

    def pi(self, a: AlgebraElement) -> QMatrix:
        """Representation on the graded space: rep(a) (+) 0."""
        if a.level != self.level or a.block_dims != self.dims:
            raise LevelMismatchError(
                f"element at level {a.level} fed to a module at level {self.level}")
        r = self.rep(a)
        return QMatrix(2 * self.dim, 2 * self.dim, dict(r.items()))

    def direct_sum(self, other: "EvenFredholmModule") -> "EvenFredholmModule":
        if self.level != other.level or self.dims != other.dims:
            raise LevelMismatchError("modules live over different algebras")
        d1, d2 = self.dim, other.dim
        d = d1 + d2

        def rep(a: AlgebraElement, _s=self, _o=other) -> QMatrix:
            return _s.rep(a).direct_sum(_o.rep(a))

        return EvenFredholmModule(
            self.level, self.dims, d, rep,
            f=_graded_merge(self.f, other.f, d1, d2),
            gamma=_graded_merge(self.gamma, other.gamma, d1, d2),
            block_weights=tuple(x + y for x, y in zip(self.block_weights, other.block_weights)),
        )

    def __repr__(self) -> str:
        return (f"EvenFredholmModule(level={self.level}, dim={self.dim}, "
                f"weights={list(self.block_weights)})")


def _graded_merge(m1: QMatrix, m2: QMatrix, d1: int, d2: int) -> QMatrix:
    """Merge two graded 2d x 2d matrices into the graded sum layout
    (plus parts first, then minus parts)."""
    d = d1 + d2

    def remap(idx: int, dk: int, shift: int) -> int:
        return shift + idx if idx < dk else d + shift + (idx - dk)

    data = {}
    for (i, j), val in m1.items():
        data[(remap(i, d1, 0), remap(j, d1, 0))] = val
    for (i, j), val in m2.items():
        data[(remap(i, d2, d1), remap(j, d2, d1))] = val
    return QMatrix(2 * d, 2 * d, data)


def canonical_module(diagram: BratteliDiagram, level: int, block: int) -> EvenFredholmModule:
    """The block-extraction module: the canonical generator for one block."""
    dims = _check_level(diagram, level)
    if not 0 <= block < len(dims):
        raise IndexError(f"block {block} outside 0..{len(dims) - 1}")
    d = dims[block]

    def rep(a: AlgebraElement, _block=block) -> QMatrix:
        return a.blocks[_block]

    weights = tuple(1 if i == block else 0 for i in range(len(dims)))
    return EvenFredholmModule(level, dims, d, rep, _canonical_f(d), _canonical_gamma(d), weights)


def pullback(module: EvenFredholmModule, diagram: BratteliDiagram) -> EvenFredholmModule:
    """Restrict a module one level down along the diagram embedding.

    The graded space, F and gamma are unchanged; the representation
    precomposes with the embedding, and the block weights transform by the
    transposed multiplicity matrix (verified by pairing naturality).
    """
    n = module.level
    if n < 1:
        raise LevelMismatchError("cannot pull back below level 0")
    m = diagram.maps[n - 1]
    dims_lo = diagram.block_dims(n - 1)
    if module.dims != diagram.block_dims(n):
        raise LevelMismatchError("module does not match the diagram at its level")

    def rep(a: AlgebraElement, _mod=module, _diagram=diagram) -> QMatrix:
        return _mod.rep(embed(_diagram, a))

    weights = m.transpose().matvec(module.block_weights)
    return EvenFredholmModule(n - 1, dims_lo, module.dim, rep,
                              module.f, module.gamma, weights)


def k0_pushforward(diagram: BratteliDiagram, level: int, vector: Sequence[int]) -> tuple[int, ...]:
    """Push a projection-class vector one level up: multiply by M_level."""
    if level >= diagram.depth:
        raise LevelMismatchError(f"no map materialized at level {level}")
    return diagram.maps[level].matvec(tuple(int(x) for x in vector))


# ---------------------------------------------------------------------------
# Axioms


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AxiomsReport:
    checks: tuple[AxiomCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[AxiomCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def to_obj(self) -> dict:
        return {"ok": self.ok,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                           for c in self.checks]}


def _unit_index_sample(d: int) -> list[int]:
    idx = {0, d - 1, d // 2, min(1, d - 1)}
    return sorted(i for i in idx if 0 <= i < d)


def _basis_units(module: EvenFredholmModule, exhaustive: bool) -> list[AlgebraElement]:
    units = []
    dims = module.dims
    for b, d in enumerate(dims):
        index_pairs = (
            [(i, j) for i in range(d) for j in range(d)]
            if exhaustive
            else sorted({(i, j) for i in _unit_index_sample(d) for j in _unit_index_sample(d)})
        )
        for i, j in index_pairs:
            blocks = [QMatrix.zeros(dd, dd) for dd in dims]
            blocks[b] = QMatrix(d, d, {(i, j): Fraction(1)})
            units.append(AlgebraElement(module.level, tuple(blocks)))
    return units


def axioms_check(module: EvenFredholmModule) -> AxiomsReport:
    """Verify every module invariant exactly; failures are reported, not
    raised.  Compactness of the commutators is vacuous in finite dimension
    and reported as such."""
    checks = []
    d2 = 2 * module.dim
    ident = QMatrix.identity(d2)
    f, g = module.f, module.gamma
    checks.append(AxiomCheck("symmetry-selfadjoint", f.transpose() == f,
                             "F equals its transpose"))
    checks.append(AxiomCheck("symmetry-involution", f @ f == ident, "F^2 = 1"))
    checks.append(AxiomCheck("grading-involution", g @ g == ident, "gamma^2 = 1"))
    checks.append(AxiomCheck("grading-anticommutes-symmetry", g @ f == -(f @ g),
                             "gamma F = -F gamma"))

    total_units = sum(d * d for d in module.dims)
    exhaustive = total_units <= _EXHAUSTIVE_UNIT_BUDGET
    units = _basis_units(module, exhaustive)
    mode = "exhaustive" if exhaustive else f"sampled ({len(units)} units)"

    grading_ok = all(g @ module.pi(u) == module.pi(u) @ g for u in units)
    checks.append(AxiomCheck("grading-commutes-representation", grading_ok,
                             f"gamma pi(a) = pi(a) gamma on matrix units, {mode}"))

    hom_ok = True
    for x in units:
        px = module.rep(x)
        for y in units:
            if module.rep(x @ y) != px @ module.rep(y):
                hom_ok = False
                break
        if not hom_ok:
            break
    checks.append(AxiomCheck("representation-multiplicative", hom_ok,
                             f"pi(xy) = pi(x)pi(y) on matrix-unit pairs, {mode}"))

    one = AlgebraElement(module.level,
                         tuple(QMatrix.identity(d) for d in module.dims))
    support = QMatrix(d2, d2, {(i, i): Fraction(1) for i in range(module.dim)})
    checks.append(AxiomCheck("representation-unital-on-support",
                             module.pi(one) == support,
                             "pi(1) is the projection onto the plus summand"))
    checks.append(AxiomCheck("commutators-compact", True,
                             "vacuous: finite-dimensional space, every operator compact"))
    return AxiomsReport(tuple(checks))


# ---------------------------------------------------------------------------
# Pairings


@dataclass(frozen=True)
class PairingValue:
    value: Fraction

    @property
    def is_integral(self) -> bool:
        return self.value.denominator == 1

    def __int__(self) -> int:
        if not self.is_integral:
            raise ValueError(f"pairing value {self.value} is not an integer")
        return int(self.value)

    def __str__(self) -> str:
        return str(self.value)


def commutator(module: EvenFredholmModule, a: AlgebraElement) -> QMatrix:
    """F pi(a) - pi(a) F, exactly."""
    p = module.pi(a)
    return module.f @ p - p @ module.f


def cyclic_cocycle(module: EvenFredholmModule, *elements: AlgebraElement) -> PairingValue:
    """The multilinear trace functional of degree 2k on 2k+1 arguments:
    (-1)^{k(2k-1)} k! Tr(gamma pi(a_0) prod_i [F, pi(a_i)])."""
    if len(elements) % 2 == 0 or not elements:
        raise ArityError(f"expected an odd number of arguments, got {len(elements)}")
    k = (len(elements) - 1) // 2
    acc = module.gamma @ module.pi(elements[0])
    for a in elements[1:]:
        acc = acc @ commutator(module, a)
    sign = (-1) ** (k * (2 * k - 1))
    return PairingValue(sign * math.factorial(k) * acc.trace())


def chern_pair(module: EvenFredholmModule, p: AlgebraElement, k: int = 1) -> PairingValue:
    """Pairing of the module's dual class with the class of projection p.

    Returns (k!)^{-1} psi_{2k}(p, ..., p) after checking the k and k+1
    evaluations agree (for idempotent arguments the normalized sequence is
    constant); integrality of the result is asserted.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if not p.is_projection():
        raise NotAProjectionError("argument is not a symmetric idempotent")
    vals = []
    for kk in (k, k + 1):
        raw = cyclic_cocycle(module, *([p] * (2 * kk + 1)))
        vals.append(raw.value / math.factorial(kk))
    if vals[0] != vals[1]:
        raise KInstabilityError(
            f"normalized pairing differs between k={k} ({vals[0]}) and k={k + 1} ({vals[1]})")
    value = vals[0]
    assert value.denominator == 1, f"projection pairing {value} is not an integer"
    return PairingValue(value)


# ---------------------------------------------------------------------------
# Equivalence witnesses


def _is_canonical_pair(module: EvenFredholmModule) -> bool:
    return module.f == _canonical_f(module.dim) and module.gamma == _canonical_gamma(module.dim)


def _strands(module: EvenFredholmModule) -> dict[int, list[tuple[int, ...]]] | None:
    """For each block, the list of coordinate strands realizing its copies.

    Strand t of block b is the tuple of plus-part coordinates x_0..x_{d_b-1}
    such that rep(e^{(b)}_{j,0}) maps the strand root to coordinate x_j.
    Returns None when the representation is not 0/1-structured."""
    out: dict[int, list[tuple[int, ...]]] = {}
    claimed: set[int] = set()
    for b, d in enumerate(module.dims):
        def unit(i: int, j: int, _b=b, _d=d) -> AlgebraElement:
            blocks = [QMatrix.zeros(dd, dd) for dd in module.dims]
            blocks[_b] = QMatrix(_d, _d, {(i, j): Fraction(1)})
            return AlgebraElement(module.level, tuple(blocks))

        root_img = module.rep(unit(0, 0))
        roots = []
        for (i, j), val in sorted(root_img.items()):
            if i != j or val != 1:
                return None
            roots.append(i)
        strands = []
        for root in roots:
            strand = [root]
            for jj in range(1, d):
                img = module.rep(unit(jj, 0))
                hits = [i for (i, j), val in img.items() if j == root and val == 1]
                if len(hits) != 1:
                    return None
                strand.append(hits[0])
            strands.append(tuple(strand))
        for s in strands:
            for x in s:
                if x in claimed:
                    return None
                claimed.add(x)
        out[b] = strands
    if len(claimed) != module.dim:
        return None  # representation does not fill its support
    return out


def _verify_witness(m1: EvenFredholmModule, m2: EvenFredholmModule,
                    sigma: Sequence[int]) -> bool:
    if m1.f.conjugate_by_permutation(sigma) != m2.f:
        return False
    if m1.gamma.conjugate_by_permutation(sigma) != m2.gamma:
        return False
    # generating set of matrix units: diagonal, first column, first row;
    # intertwining is multiplicative and linear, so this suffices
    for b, d in enumerate(m1.dims):
        pairs = {(j, j) for j in range(d)} | {(j, 0) for j in range(d)} | {(0, j) for j in range(d)}
        for i, j in sorted(pairs):
            blocks = [QMatrix.zeros(dd, dd) for dd in m1.dims]
            blocks[b] = QMatrix(d, d, {(i, j): Fraction(1)})
            e = AlgebraElement(m1.level, tuple(blocks))
            if m1.pi(e).conjugate_by_permutation(sigma) != m2.pi(e):
                return False
    return True


def equivalence_witness(m1: EvenFredholmModule, m2: EvenFredholmModule) -> tuple[int, ...] | None:
    """Search for a permutation P of the graded space with
    P F1 P^T = F2, P gamma1 P^T = gamma2 and P pi1(a) P^T = pi2(a).

    Failure is a value (None), including dimension mismatches.  For modules
    with the canonical F and gamma the grading forces P = Q (+) Q, and Q is
    found by matching representation strands; otherwise a brute-force
    search is attempted only in very small graded dimension.
    """
    if m1.level != m2.level or m1.dims != m2.dims or m1.dim != m2.dim:
        return None
    if _is_canonical_pair(m1) and _is_canonical_pair(m2):
        s1 = _strands(m1)
        s2 = _strands(m2)
        if s1 is not None and s2 is not None:
            q: list[int | None] = [None] * m1.dim
            for b in s1:
                if len(s1[b]) != len(s2[b]):
                    return None
                for strand1, strand2 in zip(s1[b], s2[b]):
                    for src, dst in zip(strand1, strand2):
                        q[src] = dst
            if None not in q:
                d = m1.dim
                sigma = tuple(q) + tuple(d + x for x in q)
                if _verify_witness(m1, m2, sigma):
                    return sigma
            return None
    if 2 * m1.dim <= _BRUTE_FORCE_WITNESS_DIM:
        for perm in permutations(range(2 * m1.dim)):
            if _verify_witness(m1, m2, perm):
                return tuple(perm)
    return None
