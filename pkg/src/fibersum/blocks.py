"""Registry of closed 4-manifold building blocks.

A :class:`Block` records a name, the Euler characteristic and signature, a
presentation of the fundamental group, and labeled marked surfaces.  Catalog
entries carry per-field provenance tags so reports can say which numbers are
recorded inputs, which are derived, and which parts of the group data are
models rather than computations.

Complement data for a marked surface S in a block X describes
pi1(X - (S u also_removed)) together with the images of the surface basis
and the meridian in that group.  When ``also_removed`` is nonempty the same
record carries images and meridians for the co-removed surfaces, which is
what lets the fiber-sum engine keep complement information for carried
surfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .fpgroup import (
    IDENTITY,
    GroupHom,
    Presentation,
    Word,
    abelianization,
    commutator,
    format_presentation,
    format_word,
    free_group,
    gen,
    surface_group,
    surface_relator,
    trivial_hom,
)

__all__ = [
    "Block",
    "MarkedSurface",
    "ComplementData",
    "CatalogError",
    "ValidationReport",
    "block",
    "validate",
    "elliptic",
    "stipsicz",
    "elbow",
    "s11",
    "product_torus",
    "MG",
    "block_to_dict",
    "clear_caches",
]

TRIVIAL_GROUP = Presentation()


class CatalogError(ValueError):
    """Bad catalog parameter or an invariant violation in a catalog block."""


@dataclass(frozen=True)
class ComplementData:
    """Group data for the complement of a marked surface (and possibly a few
    co-removed surfaces) inside its block."""

    group: Presentation
    surface_images: Mapping[str, Word]
    meridian: Word = IDENTITY
    also_removed: tuple[str, ...] = ()
    co_images: Mapping[str, Mapping[str, Word]] = field(default_factory=dict)
    co_meridians: Mapping[str, Word] = field(default_factory=dict)


@dataclass(frozen=True)
class MarkedSurface:
    """An embedded surface record: genus, square, flags and group data."""

    label: str
    genus: int
    self_intersection: int
    symplectic: bool = True
    normal_bundle_trivial: bool = False
    inclusion: GroupHom | None = None
    complement: ComplementData | None = None
    transverse_to: tuple[str, ...] = ()  # same-block surfaces met once, transversally


@dataclass(frozen=True)
class Block:
    name: str
    chi: int
    sigma: int
    pi1: Presentation
    surfaces: Mapping[str, MarkedSurface] = field(default_factory=dict)
    provenance: Mapping[str, str] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def surface(self, label: str) -> MarkedSurface:
        try:
            return self.surfaces[label]
        except KeyError:
            raise CatalogError(
                f"block {self.name!r} has no surface {label!r} "
                f"(has {sorted(self.surfaces)})") from None


@dataclass(frozen=True)
class ValidationReport:
    block: str
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _word_over(w: Word, generators: tuple[str, ...]) -> bool:
    known = set(generators)
    return all(g in known for g, _ in w.letters)


def validate(b: Block) -> ValidationReport:
    """Check every type invariant of a block; returns all violations."""
    bad: list[str] = []
    if (b.chi + b.sigma) % 4:
        bad.append(f"chi + sigma = {b.chi + b.sigma} is not divisible by 4")
    for label, s in b.surfaces.items():
        where = f"surface {label!r}"
        if label != s.label:
            bad.append(f"{where}: key does not match label {s.label!r}")
        if s.genus < 0:
            bad.append(f"{where}: negative genus")
        if s.normal_bundle_trivial != (s.self_intersection == 0):
            bad.append(f"{where}: normal_bundle_trivial flag disagrees with "
                       f"self-intersection {s.self_intersection}")
        for other in s.transverse_to:
            if other not in b.surfaces:
                bad.append(f"{where}: transverse_to unknown surface {other!r}")
        if s.inclusion is not None:
            if s.inclusion.source != surface_group(s.genus):
                bad.append(f"{where}: inclusion source is not the standard "
                           f"genus-{s.genus} surface presentation")
            if s.inclusion.target != b.pi1:
                bad.append(f"{where}: inclusion target is not the block group")
            elif not s.inclusion.abelianized_consistent():
                bad.append(f"{where}: inclusion not abelianized-consistent")
        if s.complement is not None:
            c = s.complement
            std = surface_group(s.genus).generators
            if set(c.surface_images) != set(std):
                bad.append(f"{where}: complement images do not cover the "
                           f"standard basis")
            for g, w in c.surface_images.items():
                if not _word_over(w, c.group.generators):
                    bad.append(f"{where}: image of {g} not over complement group")
            if not _word_over(c.meridian, c.group.generators):
                bad.append(f"{where}: meridian not over complement group")
            if set(c.co_images) != set(c.also_removed) or \
                    set(c.co_meridians) != set(c.also_removed):
                bad.append(f"{where}: co-removed data keys do not match "
                           f"also_removed {c.also_removed}")
            for other in c.also_removed:
                if other not in b.surfaces:
                    bad.append(f"{where}: also_removed unknown surface {other!r}")
    return ValidationReport(b.name, tuple(bad))


def _checked(b: Block) -> Block:
    report = validate(b)
    if not report.ok:
        raise CatalogError(f"invalid block {b.name!r}: " + "; ".join(report.violations))
    return b


def _trivial_complement(genus: int, co_removed: Mapping[str, int] | None = None) -> ComplementData:
    """Simply connected complement record with trivial images and meridian.

    ``co_removed`` maps co-removed surface labels to their genera so the
    record can carry trivial basis images for them too.
    """
    co_removed = co_removed or {}
    std = surface_group(genus).generators
    return ComplementData(
        group=TRIVIAL_GROUP,
        surface_images={g: IDENTITY for g in std},
        meridian=IDENTITY,
        also_removed=tuple(co_removed),
        co_images={lab: {g: IDENTITY for g in surface_group(h).generators}
                   for lab, h in co_removed.items()},
        co_meridians={lab: IDENTITY for lab in co_removed},
    )


def _torus_hom(target: Presentation, u: Word, v: Word) -> GroupHom:
    return GroupHom(surface_group(1), target, {"a1": u, "b1": v})


# ---------------------------------------------------------------------------
# Catalog entries
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def elliptic(n: int) -> Block:
    """Simply connected elliptic block E(n): chi = 12n, sigma = -8n.

    Marked surfaces: the fiber F (torus, square 0, simply connected
    complement with trivial meridian) and a section S (sphere, square -n)
    meeting F once.  The invariants are derived data, certified against the
    recorded pipeline totals by the reconstruction oracle in the test suite.
    """
    if n < 1:
        raise CatalogError(f"elliptic block needs n >= 1, got {n}")
    pi1 = TRIVIAL_GROUP
    fiber = MarkedSurface(
        "F", genus=1, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=trivial_hom(surface_group(1), pi1),
        complement=_trivial_complement(1),
        transverse_to=("S",),
    )
    section = MarkedSurface(
        "S", genus=0, self_intersection=-n, symplectic=True,
        normal_bundle_trivial=(n == 0),
        inclusion=trivial_hom(surface_group(0), pi1),
        transverse_to=("F",),
    )
    return _checked(Block(
        name=f"E({n})",
        chi=12 * n,
        sigma=-8 * n,
        pi1=pi1,
        surfaces={"F": fiber, "S": section},
        provenance={
            "chi": "derived (back-solved from recorded totals)",
            "sigma": "derived (back-solved from recorded totals)",
            "pi1": "recorded",
            "surfaces.F": "recorded (simply connected complement, trivial meridian)",
            "surfaces.S": "recorded (section square -n)",
        },
    ))


def _base_names(genus: int) -> tuple[str, ...]:
    return surface_group(genus, ("x", "y")).generators


@lru_cache(maxsize=None)
def stipsicz(n: int) -> Block:
    """High-slope fibration block X(n): a genus-(15n+1) fibration over a
    genus-(n+2) surface with a section of square -(n+1).

    chi = 75n^2 + 180n + 12 and sigma = 25n^2 - 60n - 8 are recorded inputs.
    The fiber complement is modeled as the free group on the 2(n+2) base
    generators with trivial fiber images; its meridian is the boundary word
    of the punctured base, the unique choice that makes the complement
    presentation reproduce the recorded closed group.  All of this is
    recorded data, flagged as such.
    """
    if n < 0:
        raise CatalogError(f"fibration block needs n >= 0, got {n}")
    m = 15 * n + 1
    base_genus = n + 2
    pi1 = surface_group(base_genus, ("x", "y"))
    base_pairs = [(f"x{i}", f"y{i}") for i in range(1, base_genus + 1)]
    boundary = surface_relator(base_pairs)
    fiber = MarkedSurface(
        "F", genus=m, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=trivial_hom(surface_group(m), pi1),
        complement=ComplementData(
            group=free_group(pi1.generators),
            surface_images={g: IDENTITY for g in surface_group(m).generators},
            meridian=boundary,
        ),
        transverse_to=("T",),
    )
    section = MarkedSurface(
        "T", genus=base_genus, self_intersection=-(n + 1), symplectic=True,
        normal_bundle_trivial=False,
        inclusion=GroupHom(surface_group(base_genus), pi1,
                           {std: gen(target) for std, target in
                            zip(surface_group(base_genus).generators, pi1.generators)}),
        transverse_to=("F",),
    )
    return _checked(Block(
        name=f"X({n})",
        chi=75 * n * n + 180 * n + 12,
        sigma=25 * n * n - 60 * n - 8,
        pi1=pi1,
        surfaces={"F": fiber, "T": section},
        provenance={
            "chi": "recorded",
            "sigma": "recorded",
            "pi1": "recorded (base surface group)",
            "surfaces.F": "model (free base group, fiber images trivial, "
                          "boundary-word meridian)",
            "surfaces.T": "recorded (section, square -(n+1))",
        },
        flags=("model: fiber complement of X(n) is recorded data, "
               "not derived",),
    ))


def _elbow_relators(n: int, include_ab: bool) -> tuple[Word, ...]:
    a, b = gen("a"), gen("b")
    rels: list[Word] = []
    if include_ab:
        rels.append(commutator(a, b))
    for i in range(1, n + 1):
        rels.append(commutator(a, gen(f"t{i}")))
        rels.append(commutator(a, gen(f"s{i}")))
    # [b, t1] = a, written as b t1 b^-1 t1^-1 a^-1
    rels.append(commutator(b, gen("t1")) * a.inverse())
    for i in range(2, n + 1):
        rels.append(commutator(b, gen(f"t{i}")))
    for i in range(1, n + 1):
        rels.append(commutator(b, gen(f"s{i}")))
    rels.append(surface_relator([(f"t{i}", f"s{i}") for i in range(1, n + 1)]))
    return tuple(rels)


@lru_cache(maxsize=None)
def elbow(n: int) -> Block:
    """Torus-fibration elbow block Elb(n) with chi = sigma = 0.

    pi1 = < a, b, t1, s1, ..., tn, sn | a central, [b,t1] = a,
    [b,ti] = 1 (i > 1), [b,si] = 1, prod [ti,si] = 1 >.  Marked surfaces:
    the square-zero torus T' (images b, s1), the genus-n section D (images
    t1, s1, ..., tn, sn) whose complement drops only the [a,b] relation and
    has meridian [a,b], and the fiber torus F (images a, b) meeting D once.
    """
    if n < 1:
        raise CatalogError(f"elbow block needs n >= 1, got {n}")
    names = ("a", "b") + tuple(
        name for i in range(1, n + 1) for name in (f"t{i}", f"s{i}"))
    pi1 = Presentation(names, _elbow_relators(n, include_ab=True))
    complement_group = Presentation(names, _elbow_relators(n, include_ab=False))
    section_std = surface_group(n).generators
    section_images = {}
    for i in range(1, n + 1):
        section_images[f"a{i}"] = gen(f"t{i}")
        section_images[f"b{i}"] = gen(f"s{i}")
    torus = MarkedSurface(
        "Tp", genus=1, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=_torus_hom(pi1, gen("b"), gen("s1")),
    )
    section = MarkedSurface(
        "D", genus=n, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=GroupHom(surface_group(n), pi1,
                           {g: section_images[g] for g in section_std}),
        complement=ComplementData(
            group=complement_group,
            surface_images=section_images,
            meridian=commutator(gen("a"), gen("b")),
        ),
        transverse_to=("F",),
    )
    fiber = MarkedSurface(
        "F", genus=1, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=_torus_hom(pi1, gen("a"), gen("b")),
        transverse_to=("D",),
    )
    return _checked(Block(
        name=f"Elb({n})",
        chi=0,
        sigma=0,
        pi1=pi1,
        surfaces={"Tp": torus, "D": section, "F": fiber},
        provenance={
            "chi": "recorded",
            "sigma": "recorded",
            "pi1": "recorded",
            "surfaces.Tp": "recorded (square-zero torus, images b and s1)",
            "surfaces.D": "recorded (section; complement keeps a central "
                          "except on b, meridian [a,b])",
            "surfaces.F": "derived (fiber torus, images a and b, meets D once)",
        },
    ))


@lru_cache(maxsize=None)
def s11() -> Block:
    """The simply connected block with chi = 23, sigma = -15 carrying a
    disjoint torus T and genus-2 surface F whose union has simply connected
    complement (recorded).  Both complement records remove the union, so the
    engine can keep complement data for whichever surface is carried."""
    pi1 = TRIVIAL_GROUP
    torus = MarkedSurface(
        "T", genus=1, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=trivial_hom(surface_group(1), pi1),
        complement=_trivial_complement(1, co_removed={"F": 2}),
    )
    genus2 = MarkedSurface(
        "F", genus=2, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=trivial_hom(surface_group(2), pi1),
        complement=_trivial_complement(2, co_removed={"T": 1}),
    )
    return _checked(Block(
        name="S11",
        chi=23,
        sigma=-15,
        pi1=pi1,
        surfaces={"T": torus, "F": genus2},
        provenance={
            "chi": "recorded",
            "sigma": "recorded",
            "pi1": "derived (quotient of the simply connected union complement)",
            "surfaces.T": "recorded (union complement simply connected)",
            "surfaces.F": "recorded (union complement simply connected)",
        },
    ))


@lru_cache(maxsize=None)
def product_torus(g: int) -> Block:
    """Product block T^2 x Sigma_g with chi = sigma = 0.

    Surfaces: the torus fiber F (images the two central generators u, v) and
    a section S of genus g (images c1, d1, ..., cg, dg), meeting once.
    """
    if g < 0:
        raise CatalogError(f"product block needs genus >= 0, got {g}")
    base = surface_group(g, ("c", "d"))
    names = ("u", "v") + base.generators
    rels: list[Word] = [commutator(gen("u"), gen("v"))]
    for w in base.generators:
        rels.append(commutator(gen("u"), gen(w)))
        rels.append(commutator(gen("v"), gen(w)))
    rels.extend(base.relators)
    pi1 = Presentation(names, tuple(rels))
    fiber = MarkedSurface(
        "F", genus=1, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=_torus_hom(pi1, gen("u"), gen("v")),
        transverse_to=("S",),
    )
    section_images = {}
    for i in range(1, g + 1):
        section_images[f"a{i}"] = gen(f"c{i}")
        section_images[f"b{i}"] = gen(f"d{i}")
    section = MarkedSurface(
        "S", genus=g, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=GroupHom(surface_group(g), pi1, section_images),
        transverse_to=("F",),
    )
    return _checked(Block(
        name=f"T2xS{g}",
        chi=0,
        sigma=0,
        pi1=pi1,
        surfaces={"F": fiber, "S": section},
        provenance={"chi": "derived", "sigma": "derived", "pi1": "derived"},
    ))


@lru_cache(maxsize=None)
def MG(presentation: Presentation) -> Block:
    """Block with prescribed fundamental group.

    For a presentation with g generators and r relators: chi = 12(g+r+1),
    sigma = -8(g+r+1), pi1 the given presentation verbatim.  Carries a
    square-zero torus T0 with trivial inclusion images; its complement group
    is recorded as the same presentation with trivial surface images and
    trivial meridian.
    """
    if not isinstance(presentation, Presentation):
        raise CatalogError("MG needs a Presentation")
    g, r = presentation.rank_data
    k = g + r + 1
    torus = MarkedSurface(
        "T0", genus=1, self_intersection=0, symplectic=True,
        normal_bundle_trivial=True,
        inclusion=trivial_hom(surface_group(1), presentation),
        complement=ComplementData(
            group=presentation,
            surface_images={"a1": IDENTITY, "b1": IDENTITY},
            meridian=IDENTITY,
        ),
    )
    return _checked(Block(
        name=f"M(G:{g}g{r}r)",
        chi=12 * k,
        sigma=-8 * k,
        pi1=presentation,
        surfaces={"T0": torus},
        provenance={
            "chi": "recorded (12(g+r+1))",
            "sigma": "recorded (-8(g+r+1))",
            "pi1": "recorded (given presentation, verbatim)",
            "surfaces.T0": "recorded (complement group = given presentation, "
                           "trivial images and meridian)",
        },
        flags=("model: T0 complement data of M(G) is recorded, not derived",),
    ))


_CATALOG = {
    "elliptic": elliptic,
    "stipsicz": stipsicz,
    "elbow": elbow,
    "s11": s11,
    "product_torus": product_torus,
    "MG": MG,
}


def block(kind: str, *params) -> Block:
    """Catalog dispatch: kind in {elliptic, stipsicz, elbow, s11,
    product_torus, MG} with the documented parameters."""
    try:
        ctor = _CATALOG[kind]
    except KeyError:
        raise CatalogError(
            f"unknown block kind {kind!r} (have {sorted(_CATALOG)})") from None
    return ctor(*params)


def clear_caches() -> None:
    for ctor in (elliptic, stipsicz, elbow, s11, product_torus, MG):
        ctor.cache_clear()


# ---------------------------------------------------------------------------
# Serialization (documented in the README)
# ---------------------------------------------------------------------------

def _images_to_dict(images: Mapping[str, Word]) -> dict[str, str]:
    return {g: format_word(w) for g, w in images.items()}


def _complement_to_dict(c: ComplementData) -> dict:
    return {
        "group": format_presentation(c.group),
        "surface_images": _images_to_dict(c.surface_images),
        "meridian": format_word(c.meridian),
        "also_removed": list(c.also_removed),
        "co_images": {lab: _images_to_dict(im) for lab, im in c.co_images.items()},
        "co_meridians": {lab: format_word(w) for lab, w in c.co_meridians.items()},
    }


def _surface_to_dict(s: MarkedSurface) -> dict:
    return {
        "genus": s.genus,
        "self_intersection": s.self_intersection,
        "symplectic": s.symplectic,
        "normal_bundle_trivial": s.normal_bundle_trivial,
        "transverse_to": list(s.transverse_to),
        "inclusion": None if s.inclusion is None else _images_to_dict(s.inclusion.images),
        "complement": None if s.complement is None else _complement_to_dict(s.complement),
    }


def block_to_dict(b: Block) -> dict:
    """JSON-ready description of a block, provenance included."""
    return {
        "name": b.name,
        "chi": b.chi,
        "sigma": b.sigma,
        "pi1": format_presentation(b.pi1),
        "abelianization": str(abelianization(b.pi1)),
        "surfaces": {lab: _surface_to_dict(s) for lab, s in b.surfaces.items()},
        "provenance": dict(b.provenance),
        "flags": list(b.flags),
    }
