"""Limits of towers of finitely generated free abelian groups.

Three functors are computed on a ``Tower``: the direct limit (colimit) of a
covariant tower, and the inverse limit and its first derived functor lim^1
of a contravariant tower, together with the Mittag-Leffler image-chain
test.  Answers are symbolic ``GroupDescriptor`` values; every verdict that
is not a finite-computation triviality is accompanied by a ``Certificate``
whose payload can be re-checked with exactlin operations alone.

Decision procedure, by tower shape:

* no tail (finite tower): the tower is constant beyond its top level, so
  the colimit and the limit are the top group and lim^1 vanishes.  This is
  the eventually-constant-identity case and is cross-checked in the test
  suite against brute-force enumeration of compatible sequences.
* rank one with a guaranteed tail: a compatible sequence must satisfy
  a_n = m_{n+1} a_{n+1} at every step; when factors > 1 repeat forever the
  entries of any compatible sequence are divisible by unbounded products,
  so the limit is trivial, the image chain strictly decreases forever, and
  lim^1 is the quotient of the profinite completion at the supernatural
  product of the step factors by the integers.  When the repeating factors
  are all 1 the chain stabilizes and everything is free of rank one.
* stationary tail T (multi-block): the limit is determined by the chain of
  images of the powers of T.  One equality im(T^s) = im(T^{s+1}) propagates
  forever (applying the injective-on-its-image map T preserves the
  equality), and T restricted to the stabilized image is a surjective, and
  hence bijective, endomorphism, so the limit is free of rank im(T^s) —
  exact.  If the chain keeps strictly decreasing at stable rank the index
  [I_j : I_{j+1}] is constant and > 1, so it provably never stabilizes:
  Mittag-Leffler fails, exactly.  The limit rank is then estimated from
  the elementary divisors of T^horizon (directions with growing divisors
  are dead) and reported with horizon-certified confidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .bratteli import CONTRAVARIANT, COVARIANT, Tower
from .exactlin import (
    IntMatrix,
    Lattice,
    full_lattice,
    image_lattice,
    invariant_factors,
    lattice_equal,
    lattice_member,
    lattice_subset,
    mat_pow,
    rank as matrix_rank,
)

DEFAULT_HORIZON = 24

EXACT = "exact"
HORIZON_CERTIFIED = "horizon-certified"

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

IMAGE_CHAIN_STABILIZED = "image-chain-stabilized"
STRICTLY_DECREASING = "strictly-decreasing-witness"
INJECTIVITY = "injectivity"
HORIZON_EXHAUSTED = "horizon-exhausted"


class DirectionError(ValueError):
    """Operation applied to a tower of the wrong variance."""


class HorizonError(ValueError):
    """Horizon outside the materialized depth."""


class MixedTowerError(ValueError):
    """Element calculus applied across different towers."""


class RankOneError(ValueError):
    """Rank-one closed form requested on a tower with larger blocks."""


# ---------------------------------------------------------------------------
# Supernatural numbers


def _factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    m = n
    p = 2
    while p * p <= m:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


@dataclass(frozen=True)
class SupernaturalNumber:
    """Formal product of primes with exponents in N or infinity.

    ``exponents`` maps primes to positive exponents; ``None`` stands for an
    unbounded exponent.  The empty product is 1.  ``truncated`` flags a
    product read off a finite materialized tower with no tail guarantee.
    """

    exponents: tuple[tuple[int, int | None], ...] = ()
    truncated: bool = False

    def __post_init__(self) -> None:
        last = 1
        for p, e in self.exponents:
            if p <= last:
                raise ValueError("primes must be strictly increasing")
            if e is not None and e < 1:
                raise ValueError("exponents must be positive (omit zero entries)")
            last = p

    @classmethod
    def one(cls, truncated: bool = False) -> "SupernaturalNumber":
        return cls((), truncated)

    @classmethod
    def from_int(cls, n: int, truncated: bool = False) -> "SupernaturalNumber":
        fac = _factorize(n)
        return cls(tuple(sorted(fac.items())), truncated)

    @classmethod
    def from_factors(cls, factors: Sequence[int],
                     infinite_factors: Sequence[int] = (),
                     truncated: bool = False) -> "SupernaturalNumber":
        """Product of ``factors`` with every prime of ``infinite_factors``
        raised to an unbounded exponent."""
        acc: dict[int, int | None] = {}
        for f in factors:
            for p, e in _factorize(f).items():
                cur = acc.get(p, 0)
                acc[p] = None if cur is None else cur + e
        for f in infinite_factors:
            for p in _factorize(f):
                acc[p] = None
        items = tuple(sorted((p, e) for p, e in acc.items() if e is None or e > 0))
        return cls(items, truncated)

    def exponent(self, p: int) -> int | None:
        for q, e in self.exponents:
            if q == p:
                return e
        return 0

    @property
    def is_one(self) -> bool:
        return not self.exponents

    @property
    def is_infinite(self) -> bool:
        return any(e is None for _, e in self.exponents)

    @property
    def all_infinite(self) -> bool:
        return bool(self.exponents) and all(e is None for _, e in self.exponents)

    def radical(self) -> int:
        out = 1
        for p, _ in self.exponents:
            out *= p
        return out

    def finite_value(self) -> int:
        """The integer value, defined only when every exponent is finite."""
        if self.is_infinite:
            raise ValueError("supernatural number is infinite")
        out = 1
        for p, e in self.exponents:
            out *= p ** e
        return out

    def __mul__(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        acc: dict[int, int | None] = dict(self.exponents)
        for p, e in other.exponents:
            cur = acc.get(p, 0)
            acc[p] = None if (e is None or cur is None) else cur + e
        return SupernaturalNumber(tuple(sorted(acc.items())),
                                  self.truncated or other.truncated)

    def __str__(self) -> str:
        if not self.exponents:
            return "1"
        parts = []
        for p, e in self.exponents:
            if e is None:
                parts.append(f"{p}^inf")
            elif e == 1:
                parts.append(str(p))
            else:
                parts.append(f"{p}^{e}")
        return "*".join(parts)

    def to_obj(self) -> dict:
        return {
            "exponents": {str(p): ("inf" if e is None else e) for p, e in self.exponents},
            "truncated": self.truncated,
        }


# ---------------------------------------------------------------------------
# Group descriptors

ZERO = "zero"
FREE = "free"
LOCALIZATION = "localization"
PROFINITE_QUOTIENT = "profinite-quotient"
PRESENTATION = "direct-limit-presentation"
NONZERO_UNCOUNTABLE_LIM1 = "nonzero-uncountable-lim1"


@dataclass(frozen=True)
class GroupDescriptor:
    """Symbolic answer for an abelian group, with a confidence flag.

    ``detail`` and ``witness_level`` are informational payload and do not
    take part in equality.
    """

    kind: str
    rank: int | None = None
    s: SupernaturalNumber | None = None
    confidence: str = EXACT
    witness_level: int | None = field(default=None, compare=False)
    detail: str = field(default="", compare=False)

    @classmethod
    def zero(cls, confidence: str = EXACT, detail: str = "") -> "GroupDescriptor":
        return cls(ZERO, confidence=confidence, detail=detail)

    @classmethod
    def free(cls, rank: int, confidence: str = EXACT, detail: str = "") -> "GroupDescriptor":
        if rank < 0:
            raise ValueError("negative rank")
        if rank == 0:
            return cls.zero(confidence=confidence, detail=detail)
        return cls(FREE, rank=rank, confidence=confidence, detail=detail)

    @classmethod
    def localization(cls, s: SupernaturalNumber, detail: str = "") -> "GroupDescriptor":
        """Subgroup of Q generated by 1/m over finite divisors m of s.

        A finite s gives a cyclic group isomorphic to Z, so the descriptor
        normalizes to FreeAbelian(1).
        """
        if not s.is_infinite:
            return cls.free(1, detail=detail or f"finite localization {s} is infinite cyclic")
        return cls(LOCALIZATION, s=s, detail=detail)

    @classmethod
    def profinite_quotient(cls, s: SupernaturalNumber, detail: str = "") -> "GroupDescriptor":
        if not s.is_infinite:
            raise ValueError("profinite quotient requires an infinite supernatural number")
        return cls(PROFINITE_QUOTIENT, s=s, detail=detail)

    @classmethod
    def presentation(cls, confidence: str = EXACT, detail: str = "") -> "GroupDescriptor":
        return cls(PRESENTATION, confidence=confidence, detail=detail)

    @classmethod
    def nonzero_uncountable_lim1(cls, witness_level: int, detail: str = "") -> "GroupDescriptor":
        return cls(NONZERO_UNCOUNTABLE_LIM1, witness_level=witness_level, detail=detail)

    def __str__(self) -> str:
        if self.kind == ZERO:
            body = "0"
        elif self.kind == FREE:
            body = "Z" if self.rank == 1 else f"Z^{self.rank}"
        elif self.kind == LOCALIZATION:
            if self.s.all_infinite:
                body = f"Z[1/{self.s.radical()}]"
            else:
                body = f"Z[1/({self.s})]"
        elif self.kind == PROFINITE_QUOTIENT:
            if self.s.all_infinite:
                body = f"Z_{self.s.radical()}-hat/Z"
            else:
                body = f"Z_({self.s})-hat/Z"
        elif self.kind == PRESENTATION:
            body = "direct-limit presentation (unclassified)"
        else:
            body = f"nonzero uncountable lim^1 (witness level {self.witness_level})"
        if self.confidence != EXACT:
            body += f" [{self.confidence}]"
        return body

    def to_obj(self) -> dict:
        obj: dict = {"kind": self.kind, "confidence": self.confidence, "text": str(self)}
        if self.rank is not None:
            obj["rank"] = self.rank
        if self.s is not None:
            obj["supernatural"] = self.s.to_obj()
        if self.witness_level is not None:
            obj["witness_level"] = self.witness_level
        if self.detail:
            obj["detail"] = self.detail
        return obj


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class Certificate:
    """Machine-checkable evidence for a limit verdict.

    kinds: image-chain-stabilized (chain equality from ``stabilized_at``
    on), strictly-decreasing-witness (chain of lattices with strict drops),
    injectivity (full column rank of the listed steps), horizon-exhausted
    (no verdict within the horizon).  ``lattices`` always lists the image
    chain that was inspected, starting with the full lattice.
    """

    kind: str
    level: int | None = None
    stabilized_at: int | None = None
    horizon: int | None = None
    lattices: tuple[Lattice, ...] = ()
    levels: tuple[int, ...] = ()
    note: str = ""

    def to_obj(self) -> dict:
        obj: dict = {"kind": self.kind}
        if self.level is not None:
            obj["level"] = self.level
        if self.stabilized_at is not None:
            obj["stabilized_at"] = self.stabilized_at
        if self.horizon is not None:
            obj["horizon"] = self.horizon
        if self.lattices:
            obj["lattices"] = [lat.to_obj() for lat in self.lattices]
        if self.levels:
            obj["levels"] = list(self.levels)
        if self.note:
            obj["note"] = self.note
        return obj


def recheck_certificate(cert: Certificate, tower: Tower) -> bool:
    """Re-verify a certificate's payload using exactlin operations only."""
    if cert.kind == HORIZON_EXHAUSTED:
        return True
    chain = cert.lattices
    if not chain:
        return True
    for earlier, later in zip(chain, chain[1:]):
        if not lattice_subset(later, earlier):
            return False
    if cert.kind == IMAGE_CHAIN_STABILIZED:
        s = cert.stabilized_at
        if s is not None and s + 1 < len(chain):
            if not lattice_equal(chain[s], chain[s + 1]):
                return False
        for i in cert.levels:
            step = tower.steps[i]
            if matrix_rank(step) != step.cols:
                return False
        return True
    if cert.kind == STRICTLY_DECREASING:
        return any(not lattice_equal(a, b) for a, b in zip(chain, chain[1:]))
    if cert.kind == INJECTIVITY:
        return all(matrix_rank(tower.steps[i]) == tower.steps[i].cols for i in cert.levels)
    return False


# ---------------------------------------------------------------------------
# Shared helpers


def _require_direction(tower: Tower, direction: str) -> None:
    if tower.direction != direction:
        raise DirectionError(f"expected a {direction} tower, got {tower.direction}")


def _require_horizon(tower: Tower, horizon: int) -> None:
    if horizon < 1:
        raise HorizonError("horizon must be at least 1")
    if horizon > tower.depth and tower.depth > 0:
        raise HorizonError(f"horizon {horizon} exceeds materialized depth {tower.depth}")


def _image_chain(tower: Tower, level: int, count: int) -> list[Lattice]:
    """[im(composite level+j -> level)]_{j=0..count}; entry 0 is Z^{k_level}."""
    chain = [full_lattice(tower.ranks[level])]
    comp = IntMatrix.identity(tower.ranks[level])
    for j in range(1, count + 1):
        comp = comp @ tower.steps[level + j - 1]
        chain.append(image_lattice(comp))
    return chain


def _power_chain(t: IntMatrix, count: int) -> list[Lattice]:
    chain = [full_lattice(t.rows)]
    acc = IntMatrix.identity(t.rows)
    for _ in range(count):
        acc = acc @ t
        chain.append(image_lattice(acc))
    return chain


def _first_plateau(chain: Sequence[Lattice]) -> int | None:
    for j in range(len(chain) - 1):
        if lattice_equal(chain[j], chain[j + 1]):
            return j
    return None


def supernatural_of(tower: Tower) -> SupernaturalNumber:
    """Supernatural product of the step factors of a rank-one tower.

    Primes of a guaranteed tail get unbounded exponents; a tower with no
    tail yields the finite materialized product, flagged as truncated.
    """
    if not tower.is_rank_one:
        raise RankOneError("supernatural product needs a rank-one tower")
    factors = [tower.step_factor(i) for i in range(tower.depth)]
    if any(f < 1 for f in factors):
        raise ValueError("step factors must be positive")
    if tower.tail is None:
        return SupernaturalNumber.from_factors(factors, truncated=True)
    cycle = tower.tail.factor_cycle()
    return SupernaturalNumber.from_factors(factors, infinite_factors=[f for f in cycle if f > 1])


def _tail_has_growth(tower: Tower) -> bool:
    return tower.tail is not None and any(f > 1 for f in tower.tail.factor_cycle())


# ---------------------------------------------------------------------------
# Direct limits (covariant towers)


@dataclass(frozen=True)
class LimitElement:
    """A colimit class represented at a materialized level."""

    tower: Tower
    level: int
    vector: tuple[int, ...]


def colim_inject(tower: Tower, level: int, vector: Sequence[int]) -> LimitElement:
    _require_direction(tower, COVARIANT)
    if not 0 <= level <= tower.depth:
        raise HorizonError(f"level {level} outside 0..{tower.depth}")
    vec = tuple(int(x) for x in vector)
    if len(vec) != tower.ranks[level]:
        raise ValueError(f"vector length {len(vec)} does not match rank {tower.ranks[level]}")
    return LimitElement(tower, level, vec)


def colim_raise(x: LimitElement, level: int) -> LimitElement:
    if level < x.level or level > x.tower.depth:
        raise HorizonError(f"cannot raise from level {x.level} to {level}")
    vec = x.vector
    for i in range(x.level, level):
        vec = x.tower.steps[i].matvec(vec)
    return LimitElement(x.tower, level, vec)


def colim_add(x: LimitElement, y: LimitElement) -> LimitElement:
    if x.tower != y.tower:
        raise MixedTowerError("elements live in different towers")
    level = max(x.level, y.level)
    xv = colim_raise(x, level).vector
    yv = colim_raise(y, level).vector
    return LimitElement(x.tower, level, tuple(a + b for a, b in zip(xv, yv)))


def colim_neg(x: LimitElement) -> LimitElement:
    return LimitElement(x.tower, x.level, tuple(-a for a in x.vector))


def colim_is_zero(x: LimitElement) -> bool:
    zero = LimitElement(x.tower, x.level, (0,) * len(x.vector))
    return colim_equal(x, zero)


def colim_equal(x: LimitElement, y: LimitElement) -> bool:
    """Exact equality of colimit classes.

    Two classes agree iff some composite map kills their difference.  For a
    finite tower the top level decides; injective steps (all rank-one
    diagram towers) decide immediately; for a stationary tail the kernels
    of the powers of T stabilize within rank-many steps, so applying T that
    often decides.
    """
    if x.tower != y.tower:
        raise MixedTowerError("elements live in different towers")
    tower = x.tower
    level = max(x.level, y.level)
    xv = colim_raise(x, level).vector
    yv = colim_raise(y, level).vector
    diff = tuple(a - b for a, b in zip(xv, yv))
    if all(d == 0 for d in diff):
        return True
    # push the difference to the top of the materialized tower
    for i in range(level, tower.depth):
        diff = tower.steps[i].matvec(diff)
        if all(d == 0 for d in diff):
            return True
    if tower.tail is None:
        return False  # the colimit of a finite tower is its top group
    if tower.tail.kind == "cyclic":
        return False  # positive factors: every further step is injective
    t = tower.tail.matrix
    for _ in range(t.rows):
        diff = t.matvec(diff)
        if all(d == 0 for d in diff):
            return True
    return False  # ker(T^j) has stabilized: the difference survives forever


def colim_descriptor(tower: Tower) -> GroupDescriptor:
    """Classify the direct limit of a covariant tower.

    Rank-one towers localize Z at the supernatural product of their step
    factors.  A tower that is unimodular from some point on (in particular
    any finite tower, by constancy beyond its top) is free.  Everything
    else is reported as a presentation, exact as such, with the element
    calculus available for computations.
    """
    _require_direction(tower, COVARIANT)
    if tower.is_rank_one:
        return GroupDescriptor.localization(supernatural_of(tower))
    if tower.tail is None:
        return GroupDescriptor.free(
            tower.ranks[-1], detail="finite tower: colimit is the top-level group")
    t = tower.tail.matrix
    if t.is_unimodular() and all(s.is_unimodular() for s in tower.steps):
        return GroupDescriptor.free(
            tower.ranks[-1], detail="all steps unimodular: colimit is any level")
    if t.is_unimodular():
        return GroupDescriptor.free(
            tower.ranks[-1],
            detail="tail steps unimodular: colimit is the group at the tail boundary")
    return GroupDescriptor.presentation(
        detail=f"colimit presentation of a rank profile {list(tower.ranks)} tower")


# ---------------------------------------------------------------------------
# Inverse limits, Mittag-Leffler, lim^1 (contravariant towers)


def mittag_leffler(tower: Tower, horizon: int = DEFAULT_HORIZON) -> tuple[str, Certificate]:
    """Does every level's chain of images from above stabilize?"""
    _require_direction(tower, CONTRAVARIANT)
    _require_horizon(tower, horizon)
    n = min(horizon, tower.depth)
    chain0 = _image_chain(tower, 0, n)

    if tower.tail is None:
        return HOLDS, Certificate(
            IMAGE_CHAIN_STABILIZED, level=0, stabilized_at=n, horizon=horizon,
            lattices=tuple(chain0),
            note="finite tower: constant beyond its top level, every image chain "
                 "is eventually constant")

    if tower.is_rank_one:
        if _tail_has_growth(tower):
            return FAILS, Certificate(
                STRICTLY_DECREASING, level=0, horizon=horizon, lattices=tuple(chain0),
                note="tail repeats a factor > 1 forever: the image chain at every "
                     "level drops infinitely often and never stabilizes")
        stab = _first_plateau(chain0)
        last_growth = 0
        for i in range(tower.depth):
            if tower.step_factor(i) > 1:
                last_growth = i + 1
        return HOLDS, Certificate(
            IMAGE_CHAIN_STABILIZED, level=0,
            stabilized_at=stab if stab is not None else last_growth, horizon=horizon,
            lattices=tuple(chain0),
            note="tail factors are all 1: chains are constant beyond the last "
                 "nontrivial materialized factor")

    # stationary tail
    t = tower.tail.matrix
    tail_chain = _power_chain(t, n)
    plateau = _first_plateau(tail_chain)
    if plateau is not None:
        injective_levels = tuple(
            i for i in range(tower.depth)
            if matrix_rank(tower.steps[i]) == tower.steps[i].cols)
        return HOLDS, Certificate(
            IMAGE_CHAIN_STABILIZED, level=tower.depth, stabilized_at=plateau,
            horizon=horizon, lattices=tuple(tail_chain), levels=injective_levels,
            note="tail-power image chain stabilizes; one equality propagates "
                 "forever for a constant step, and every materialized chain is "
                 "the image of a stabilized chain under a fixed map")
    ranks = [lat.rank for lat in tail_chain]
    rank_plateau = any(ranks[j] == ranks[j + 1] for j in range(len(ranks) - 1))
    if rank_plateau:
        return FAILS, Certificate(
            STRICTLY_DECREASING, level=tower.depth, horizon=horizon,
            lattices=tuple(tail_chain),
            note="strict image drop at stable rank: the index [I_j : I_{j+1}] of "
                 "consecutive images is constant > 1, so the chain strictly "
                 "decreases forever")
    return UNKNOWN, Certificate(
        HORIZON_EXHAUSTED, level=tower.depth, horizon=horizon, lattices=tuple(tail_chain),
        note="image ranks still dropping at the horizon; raise the horizon to "
             "at least the tail block count")


def lim_descriptor(tower: Tower, horizon: int = DEFAULT_HORIZON) -> tuple[GroupDescriptor, Certificate]:
    """Inverse limit of a contravariant tower, with certificate."""
    _require_direction(tower, CONTRAVARIANT)
    _require_horizon(tower, horizon)
    n = min(horizon, tower.depth)

    if tower.tail is None:
        chain0 = _image_chain(tower, 0, n)
        desc = GroupDescriptor.free(
            tower.ranks[-1],
            detail="finite tower: compatible sequences are parameterized by the "
                   "top-level group")
        cert = Certificate(
            IMAGE_CHAIN_STABILIZED, level=0, stabilized_at=n, horizon=horizon,
            lattices=tuple(chain0),
            note="finite tower: constant beyond its top level")
        return desc, cert

    if tower.is_rank_one:
        chain0 = _image_chain(tower, 0, n)
        if _tail_has_growth(tower):
            desc = GroupDescriptor.zero(
                detail="entries of a compatible sequence are divisible by "
                       "unbounded products of step factors, hence zero")
            cert = Certificate(
                STRICTLY_DECREASING, level=0, horizon=horizon, lattices=tuple(chain0),
                note="image chain at level 0 drops by the repeating factor forever")
            return desc, cert
        stab = _first_plateau(chain0)
        desc = GroupDescriptor.free(1, detail="tail factors all 1: tower eventually constant")
        cert = Certificate(
            IMAGE_CHAIN_STABILIZED, level=0,
            stabilized_at=stab if stab is not None else n, horizon=horizon,
            lattices=tuple(chain0), note="chain constant beyond the materialized factors")
        return desc, cert

    # stationary tail: the limit is cofinal in the tail, so analyze powers of T
    t = tower.tail.matrix
    tail_chain = _power_chain(t, n)
    plateau = _first_plateau(tail_chain)
    if plateau is not None:
        r = tail_chain[plateau].rank
        inj = matrix_rank(t) == t.cols
        desc = GroupDescriptor.free(
            r, detail="stabilized tail image E satisfies T(E) = E; a surjective "
                      "endomorphism of a free abelian group is bijective, so the "
                      "limit is E")
        cert = Certificate(
            IMAGE_CHAIN_STABILIZED, level=tower.depth, stabilized_at=plateau,
            horizon=horizon, lattices=tuple(tail_chain),
            levels=tuple(range(tower.depth)) if inj else (),
            note="tail-power image chain stabilizes"
                 + ("; tail step injective" if inj else ""))
        return desc, cert
    divisors_prev = invariant_factors(mat_pow(t, max(n - 1, 1)))
    divisors_last = invariant_factors(mat_pow(t, n))
    stable = sum(1 for a, b in zip(divisors_prev, divisors_last) if a == b)
    desc = GroupDescriptor.free(
        stable, confidence=HORIZON_CERTIFIED,
        detail="directions with growing elementary divisors through the horizon "
               "are reported dead") if stable else GroupDescriptor.zero(
        confidence=HORIZON_CERTIFIED,
        detail="every elementary divisor of the tail composites grows through "
               "the horizon")
    cert = Certificate(
        HORIZON_EXHAUSTED, level=tower.depth, horizon=horizon, lattices=tuple(tail_chain),
        note=f"elementary divisors of tail powers at the horizon: {list(divisors_last)}")
    return desc, cert


def lim1_descriptor(tower: Tower, horizon: int = DEFAULT_HORIZON) -> tuple[GroupDescriptor, Certificate]:
    """Milnor lim^1 of a contravariant tower, with certificate.

    Mittag-Leffler implies vanishing.  A failing rank-one tower is the
    classical inclusion-chain situation: lim^1 is the quotient of the
    profinite completion at the supernatural factor product by Z.  A
    failing tower of larger rank is reported as nonzero and uncountable
    without finer classification.
    """
    verdict, cert = mittag_leffler(tower, horizon)
    if verdict == HOLDS:
        desc = GroupDescriptor.zero(
            detail="Mittag-Leffler condition holds, so lim^1 vanishes")
        cert = replace(cert, note=cert.note + "; Mittag-Leffler holds forces lim^1 = 0")
        return desc, cert
    if verdict == FAILS:
        if tower.is_rank_one:
            s = supernatural_of(tower)
            desc = GroupDescriptor.profinite_quotient(
                s, detail="inclusion chain of finite-index subgroups of Z: lim^1 is "
                          "the profinite completion at the factor product modulo Z")
            return desc, cert
        witness = cert.level if cert.level is not None else 0
        desc = GroupDescriptor.nonzero_uncountable_lim1(
            witness, detail="Mittag-Leffler fails for a tower of countable groups: "
                            "lim^1 is nonzero and uncountable")
        return desc, cert
    desc = GroupDescriptor.presentation(
        confidence=HORIZON_CERTIFIED,
        detail=f"lim^1 undecided at horizon {horizon}")
    return desc, cert
