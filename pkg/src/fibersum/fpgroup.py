"""Finitely presented groups: words, presentations and the operations the
fiber-sum engine consumes.

Words are freely reduced sequences of signed generator references.  A
presentation stores an ordered tuple of distinct generator names and a tuple
of relator words; relators are kept cyclically reduced and empty relators are
dropped, so structural equality of presentations is meaningful.

Everything is immutable and hashable.  Text forms follow the grammar

    presentation := "<" names "|" words ">"
    word         := "1" | factor (("*")? factor)*
    factor       := atom ("^" integer)?
    atom         := name | "[" word "," word "]" | "(" word ")"

with ``[x,y]`` standing for the commutator x y x^-1 y^-1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from . import snf
from .snf import smith_normal_form  # re-exported; part of this module's API

__all__ = [
    "Word",
    "Presentation",
    "GroupHom",
    "AbelianInvariants",
    "FPGroupError",
    "MalformedWordError",
    "free_reduce",
    "gen",
    "commutator",
    "free_group",
    "surface_group",
    "surface_relator",
    "free_product",
    "quotient_by_normal_closure",
    "abelianization",
    "smith_normal_form",
    "tietze_simplify",
    "is_presentation_trivial",
    "parse_word",
    "parse_presentation",
    "format_word",
    "format_presentation",
]


class FPGroupError(ValueError):
    """Problem with a word, presentation or homomorphism."""


class MalformedWordError(FPGroupError):
    """A word refers to a generator the ambient presentation does not have."""


Letter = tuple[str, int]


def _reduce_letters(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for name, sign in letters:
        if sign not in (1, -1):
            raise MalformedWordError(f"letter exponent must be +1 or -1, got {sign!r}")
        if not isinstance(name, str) or not name:
            raise MalformedWordError(f"generator id must be a nonempty string, got {name!r}")
        if stack and stack[-1][0] == name and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((name, sign))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """A freely reduced word; the constructor reduces whatever it is given."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _reduce_letters(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        w = Word()
        for _ in range(n):
            w = w * self
        return w

    def inverse(self) -> "Word":
        return Word(tuple((g, -s) for g, s in reversed(self.letters)))

    __invert__ = inverse

    def cyclically_reduced(self) -> "Word":
        letters = self.letters
        lo, hi = 0, len(letters)
        while hi - lo >= 2 and letters[lo][0] == letters[hi - 1][0] \
                and letters[lo][1] == -letters[hi - 1][1]:
            lo += 1
            hi -= 1
        return self if (lo, hi) == (0, len(letters)) else Word(letters[lo:hi])

    def names(self) -> set[str]:
        return {g for g, _ in self.letters}

    def exponent_sum(self, name: str) -> int:
        return sum(s for g, s in self.letters if g == name)

    def exponent_sums(self) -> dict[str, int]:
        sums: dict[str, int] = {}
        for g, s in self.letters:
            sums[g] = sums.get(g, 0) + s
        return sums

    def exponent_vector(self, generators: tuple[str, ...]) -> list[int]:
        sums = self.exponent_sums()
        return [sums.get(g, 0) for g in generators]

    def substituted(self, images: Mapping[str, "Word"]) -> "Word":
        """Replace each letter by its image word (identity where unmapped)."""
        out: list[Letter] = []
        for g, s in self.letters:
            w = images.get(g)
            if w is None:
                out.append((g, s))
            elif s == 1:
                out.extend(w.letters)
            else:
                out.extend(w.inverse().letters)
        return Word(tuple(out))

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"

    def __str__(self) -> str:
        return format_word(self)


IDENTITY = Word()


def gen(name: str) -> Word:
    """One-letter word for a generator."""
    return Word(((name, 1),))


def commutator(u: Word, v: Word) -> Word:
    return u * v * u.inverse() * v.inverse()


def free_reduce(letters, generators: Iterable[str] | None = None) -> Word:
    """Freely reduce a raw letter sequence into a :class:`Word`.

    When ``generators`` is given, unknown generator ids raise
    :class:`MalformedWordError` before any reduction happens.
    """
    letters = tuple(letters)
    if generators is not None:
        known = set(generators)
        for g, _ in letters:
            if g not in known:
                raise MalformedWordError(f"unknown generator {g!r}")
    return Word(letters)


@dataclass(frozen=True)
class Presentation:
    """Generators plus relators; relators stored cyclically reduced."""

    generators: tuple[str, ...] = ()
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise FPGroupError(f"duplicate generator names in {gens}")
        known = set(gens)
        rels = []
        for r in self.relators:
            if not isinstance(r, Word):
                r = Word(tuple(r))
            for g, _ in r.letters:
                if g not in known:
                    raise MalformedWordError(
                        f"relator {format_word(r)!r} uses unknown generator {g!r}")
            r = r.cyclically_reduced()
            if r:
                rels.append(r)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", tuple(rels))

    @classmethod
    def _trusted(cls, generators: tuple[str, ...], relators: tuple[Word, ...]):
        """Skip validation; caller guarantees the invariants already hold."""
        self = object.__new__(cls)
        object.__setattr__(self, "generators", generators)
        object.__setattr__(self, "relators", relators)
        return self

    @property
    def rank_data(self) -> tuple[int, int]:
        return len(self.generators), len(self.relators)

    def exponent_matrix(self) -> list[list[int]]:
        """Relators-by-generators matrix of exponent sums."""
        return [r.exponent_vector(self.generators) for r in self.relators]

    def renamed(self, mapping: Mapping[str, str]) -> "Presentation":
        gens = tuple(mapping.get(g, g) for g in self.generators)
        images = {g: gen(mapping[g]) for g in mapping}
        rels = tuple(r.substituted(images) for r in self.relators)
        return Presentation(gens, rels)

    def __str__(self) -> str:
        return format_presentation(self)

    def __repr__(self) -> str:
        return f"Presentation({format_presentation(self)!r})"


def free_group(names: Iterable[str]) -> Presentation:
    return Presentation(tuple(names), ())


def surface_relator(pairs: Iterable[tuple[str, str]]) -> Word:
    """Product of commutators [a1,b1][a2,b2]... for the given name pairs."""
    letters: list[Letter] = []
    for a, b in pairs:
        letters += [(a, 1), (b, 1), (a, -1), (b, -1)]
    return Word(tuple(letters))


@lru_cache(maxsize=None)
def surface_group(genus: int, prefixes: tuple[str, str] = ("a", "b")) -> Presentation:
    """Standard presentation <a1,b1,...,ag,bg | [a1,b1]...[ag,bg]> of a
    closed orientable genus-g surface group; genus 0 gives the empty
    presentation."""
    if genus < 0:
        raise FPGroupError("genus must be nonnegative")
    pa, pb = prefixes
    pairs = [(f"{pa}{i}", f"{pb}{i}") for i in range(1, genus + 1)]
    gens = tuple(name for pair in pairs for name in pair)
    rel = surface_relator(pairs)
    return Presentation(gens, (rel,) if rel else ())


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


class FreeProductResult(NamedTuple):
    presentation: Presentation
    renamed: dict[str, str]  # only the non-identity renames of the right factor


def free_product(p: Presentation, q: Presentation) -> FreeProductResult:
    """Presentation of the free product; right-factor generators are renamed
    on collision and the rename map is returned."""
    taken = set(p.generators)
    renames: dict[str, str] = {}
    for g in q.generators:
        new = fresh_name(g, taken)
        taken.add(new)
        if new != g:
            renames[g] = new
    q2 = q.renamed(renames) if renames else q
    pres = Presentation._trusted(p.generators + q2.generators,
                                 p.relators + q2.relators)
    return FreeProductResult(pres, renames)


def quotient_by_normal_closure(p: Presentation, killers: Iterable[Word]) -> Presentation:
    """Adjoin the killer words as relators (quotient by their normal closure)."""
    killers = tuple(killers)
    known = set(p.generators)
    extra = []
    for w in killers:
        for g, _ in w.letters:
            if g not in known:
                raise MalformedWordError(f"killer word uses unknown generator {g!r}")
        w = w.cyclically_reduced()
        if w:
            extra.append(w)
    if not extra:
        return p
    return Presentation._trusted(p.generators, p.relators + tuple(extra))


@dataclass(frozen=True)
class AbelianInvariants:
    """Invariant factors of an abelianized group: free rank plus the torsion
    chain d1 | d2 | ... with every di >= 2."""

    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise FPGroupError("free rank must be nonnegative")
        tor = tuple(int(d) for d in self.torsion)
        for d in tor:
            if d < 2:
                raise FPGroupError(f"torsion entries must be >= 2, got {d}")
        for a, b in zip(tor, tor[1:]):
            if b % a:
                raise FPGroupError(f"torsion {tor} is not a divisibility chain")
        object.__setattr__(self, "torsion", tor)

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append(f"Z^{self.free_rank}" if self.free_rank > 1 else "Z")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def invariants_from_matrix(matrix, n_generators: int) -> AbelianInvariants:
    diag = smith_normal_form(matrix)
    rank = sum(1 for d in diag if d)
    torsion = tuple(d for d in diag if d not in (0, 1))
    return AbelianInvariants(n_generators - rank, torsion)


def abelianization(p: Presentation) -> AbelianInvariants:
    """Invariant factors of p made abelian, via the Smith normal form of the
    relator exponent matrix."""
    return invariants_from_matrix(p.exponent_matrix(), len(p.generators))


@dataclass(frozen=True)
class GroupHom:
    """A homomorphism given on generators.  Only abelianized consistency is
    certified here; relator triviality in the target is not decided."""

    source: Presentation
    target: Presentation
    images: Mapping[str, Word]

    def __post_init__(self):
        images = dict(self.images)
        missing = [g for g in self.source.generators if g not in images]
        if missing:
            raise FPGroupError(f"missing images for generators {missing}")
        extra = [g for g in images if g not in self.source.generators]
        if extra:
            raise FPGroupError(f"images given for unknown generators {extra}")
        known = set(self.target.generators)
        for g, w in images.items():
            for name, _ in w.letters:
                if name not in known:
                    raise MalformedWordError(
                        f"image of {g!r} uses unknown target generator {name!r}")
        object.__setattr__(self, "images", images)

    def apply(self, word: Word) -> Word:
        return word.substituted(self.images)

    def abelianized_consistent(self) -> bool:
        """Each source relator's image must die in the target abelianization."""
        matrix = self.target.exponent_matrix()
        gens = self.target.generators
        for r in self.source.relators:
            v = self.apply(r).exponent_vector(gens)
            if not snf.in_row_lattice(matrix, v):
                return False
        return True


def trivial_hom(source: Presentation, target: Presentation) -> GroupHom:
    return GroupHom(source, target, {g: IDENTITY for g in source.generators})


# ---------------------------------------------------------------------------
# Tietze simplification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TietzeStep:
    move: str      # "drop_relator" or "eliminate_generator"
    detail: str
    result: Presentation


@dataclass(frozen=True)
class TietzeResult:
    presentation: Presentation
    trace: tuple[TietzeStep, ...]
    budget_exhausted: bool

    @property
    def moves(self) -> int:
        return len(self.trace)


def _snapshot(gens: list[str], rels: list[Word]) -> Presentation:
    return Presentation._trusted(tuple(gens),
                                 tuple(r for r in rels if r))


def tietze_simplify(p: Presentation, budget: int = 1000) -> TietzeResult:
    """Greedy deterministic simplification by sound moves only.

    Moves, tried in this fixed order on each pass:

    1. drop the first relator that reduces to the empty word;
    2. eliminate the first generator that occurs exactly once in some
       relator (scanning relators in order, letters left to right),
       substituting its solved value everywhere.

    Each applied move costs one budget unit.  The result presents a group
    isomorphic to the input; the trace records every move together with the
    presentation after it.
    """
    if budget < 0:
        raise FPGroupError("budget must be nonnegative")
    gens = list(p.generators)
    rels = [r for r in p.relators]
    trace: list[TietzeStep] = []

    def first_move():
        for i, r in enumerate(rels):
            if not r:
                return ("drop", i, None, None)
        for i, r in enumerate(rels):
            counts: dict[str, int] = {}
            for g0, _ in r.letters:
                counts[g0] = counts.get(g0, 0) + 1
            for k, (g0, s0) in enumerate(r.letters):
                if counts[g0] == 1:
                    return ("eliminate", i, k, s0)
        return None

    exhausted = False
    while True:
        move = first_move()
        if move is None:
            break
        if len(trace) >= budget:
            exhausted = True
            break
        kind, i, k, s0 = move
        if kind == "drop":
            rels.pop(i)
            trace.append(TietzeStep("drop_relator", f"relator #{i} trivial",
                                    _snapshot(gens, rels)))
            continue
        r = rels.pop(i)
        name = r.letters[k][0]
        before = Word(r.letters[:k])
        after = Word(r.letters[k + 1:])
        # u g^e v = 1  solves to  g = (u^-1 v^-1)^e
        solved = before.inverse() * after.inverse()
        if s0 == -1:
            solved = solved.inverse()
        images = {name: solved}
        rels = [w.substituted(images).cyclically_reduced() for w in rels]
        gens.remove(name)
        trace.append(TietzeStep(
            "eliminate_generator",
            f"{name} = {format_word(solved)}",
            _snapshot(gens, rels)))

    return TietzeResult(_snapshot(gens, rels), tuple(trace), exhausted)


@dataclass(frozen=True)
class TrivialityReport:
    certified: bool          # True only when simplification reached <  >
    witness: str | None      # obstruction or reason the answer is unknown
    simplified: Presentation

    @property
    def status(self) -> str:
        return "certified-trivial" if self.certified else "unknown"


def is_presentation_trivial(p: Presentation, budget: int = 1000) -> TrivialityReport:
    """Tri-state triviality check: certified-trivial or unknown, never
    "nontrivial".  A nontrivial abelianization short-circuits to unknown
    with that witness; otherwise a budgeted greedy simplification must reach
    the empty presentation to certify."""
    ab = abelianization(p)
    if not ab.is_trivial:
        return TrivialityReport(False, f"abelianization {ab}", p)
    res = tietze_simplify(p, budget)
    if not res.presentation.generators:
        return TrivialityReport(True, None, res.presentation)
    reason = "budget exhausted" if res.budget_exhausted else "no applicable move"
    return TrivialityReport(False, reason, res.presentation)


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<name>[A-Za-z][A-Za-z0-9_']*)
  | (?P<int>-?\d+)
  | (?P<sym>[<>|,^*\[\]()])
  | (?P<ws>\s+)
  | (?P<bad>.)
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise FPGroupError(f"unexpected character {m.group()!r} at column {m.start() + 1}")
        tokens.append((kind, m.group(), m.start()))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise FPGroupError("unexpected end of input")
        self.pos += 1
        return t

    def expect(self, value: str):
        t = self.next()
        if t[1] != value:
            raise FPGroupError(f"expected {value!r}, got {t[1]!r} at column {t[2] + 1}")
        return t

    def at_word_start(self) -> bool:
        t = self.peek()
        return t is not None and (t[0] == "name" or t[1] in "([" or t[1] == "1")

    def parse_word(self) -> Word:
        t = self.peek()
        if t is not None and t[0] == "int":
            if t[1] != "1":
                raise FPGroupError(f"unexpected integer {t[1]!r} at column {t[2] + 1}")
            self.next()
            if self.at_word_start():
                raise FPGroupError("identity token 1 cannot be followed by factors")
            return Word()
        w = Word()
        consumed = False
        while True:
            t = self.peek()
            if t is None:
                break
            if t[1] == "*":
                self.next()
                w = w * self.parse_factor()
                consumed = True
                continue
            if t[0] == "name" or t[1] in "([":
                w = w * self.parse_factor()
                consumed = True
                continue
            break
        if not consumed:
            t = self.peek()
            where = f" at column {t[2] + 1}" if t else ""
            raise FPGroupError(f"expected a word{where}")
        return w

    def parse_factor(self) -> Word:
        base = self.parse_atom()
        t = self.peek()
        if t is not None and t[1] == "^":
            self.next()
            e = self.next()
            if e[0] != "int":
                raise FPGroupError(f"expected integer exponent at column {e[2] + 1}")
            return base ** int(e[1])
        return base

    def parse_atom(self) -> Word:
        t = self.next()
        if t[0] == "name":
            return gen(t[1])
        if t[1] == "(":
            w = self.parse_word()
            self.expect(")")
            return w
        if t[1] == "[":
            u = self.parse_word()
            self.expect(",")
            v = self.parse_word()
            self.expect("]")
            return commutator(u, v)
        raise FPGroupError(f"unexpected token {t[1]!r} at column {t[2] + 1}")


def parse_word(text: str, generators: Iterable[str] | None = None) -> Word:
    """Parse a word in the text grammar; optionally validate generator names."""
    p = _Parser(text)
    t = p.peek()
    if t is None:
        raise FPGroupError("empty input (use 1 for the identity word)")
    w = p.parse_word()
    if p.peek() is not None:
        t = p.peek()
        raise FPGroupError(f"trailing input at column {t[2] + 1}")
    if generators is not None:
        known = set(generators)
        for g, _ in w.letters:
            if g not in known:
                raise MalformedWordError(f"unknown generator {g!r}")
    return w


def parse_presentation(text: str) -> Presentation:
    """Parse ``< a, b | [a,b], a^2 >``."""
    p = _Parser(text)
    p.expect("<")
    names: list[str] = []
    while True:
        t = p.peek()
        if t is None:
            raise FPGroupError("unterminated presentation")
        if t[1] == "|":
            p.next()
            break
        if t[1] == ">":
            raise FPGroupError("presentation needs a | between generators and relators")
        if names:
            p.expect(",")
        t = p.next()
        if t[0] != "name":
            raise FPGroupError(f"expected generator name, got {t[1]!r} at column {t[2] + 1}")
        names.append(t[1])
    relators: list[Word] = []
    while True:
        t = p.peek()
        if t is None:
            raise FPGroupError("unterminated presentation")
        if t[1] == ">":
            p.next()
            break
        if relators:
            p.expect(",")
        relators.append(p.parse_word())
    if p.peek() is not None:
        t = p.peek()
        raise FPGroupError(f"trailing input at column {t[2] + 1}")
    return Presentation(tuple(names), tuple(relators))


def _syllables(w: Word) -> list[tuple[str, int]]:
    out: list[tuple[str, int]] = []
    for g, s in w.letters:
        if out and out[-1][0] == g and (out[-1][1] > 0) == (s > 0):
            out[-1] = (g, out[-1][1] + s)
        else:
            out.append((g, s))
    return out


def format_word(w: Word) -> str:
    """Canonical text for a word; simple commutators print as [x,y]."""
    if not w:
        return "1"
    ls = w.letters
    if (len(ls) == 4 and ls[0][1] == 1 and ls[1][1] == 1
            and ls[2] == (ls[0][0], -1) and ls[3] == (ls[1][0], -1)
            and ls[0][0] != ls[1][0]):
        return f"[{ls[0][0]},{ls[1][0]}]"
    parts = []
    for g, e in _syllables(w):
        parts.append(g if e == 1 else f"{g}^{e}")
    return "*".join(parts)


def format_presentation(p: Presentation) -> str:
    gens = ", ".join(p.generators)
    rels = ", ".join(format_word(r) for r in p.relators)
    return f"< {gens} | {rels} >"
