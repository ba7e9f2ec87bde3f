"""The main pipeline, replayed as engine programs.

The family M(G,n) is assembled from catalog blocks in three stages:

    Z(n)  = Elb(15n+1) glued to X(n) along the genus-(15n+1) surfaces,
            connecting the elbow fiber with the section into K (genus n+3,
            square -(n+1)) and carrying the torus Tp;
    ZE(n) = Z(n) glued to E(n+5) along K and the resolved surface J
            (genus n+3, square n+1), carrying Tp;
    W(n)  = A glued to ZE(n) along T1 and Tp, carrying T2, where
            A = S11 # S11 along the genus-2 surfaces;
    M(G,n) = M(G) glued to W(n) along T0 and T2.

Sums involving the middle piece A associate; the engine composes the
ZE(n)-side first so that the carried torus T2 retains sound complement data
through the final sum (the alternative association gives the same chi and
sigma, which the test suite asserts).  Every block is engine-computed; the
closed forms appear only in construction reports and tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from . import blocks
from .blocks import Block, ComplementData, MarkedSurface
from .fpgroup import (
    IDENTITY,
    GroupHom,
    Presentation,
    gen,
    parse_presentation,
    surface_group,
    trivial_hom,
)
from .sumcalc import GluingSpec, IntersectionConfig, fiber_sum, free_product_rule, resolve_intersections

__all__ = [
    "ConstructionReport",
    "build_A",
    "build_Z",
    "build_J",
    "build_ZE",
    "build_W",
    "build_MGn",
    "elliptic_with_J",
    "chi_closed_form",
    "sigma_closed_form",
    "SAMPLE_GROUPS",
    "recorded_carried_torus_map",
    "clear_caches",
]


def chi_closed_form(n: int, gpr: int) -> int:
    """Closed form for chi(M(G,n)); gpr = g + r + 1 of the presentation."""
    return 75 * n * n + 256 * n + 130 + 12 * gpr


def sigma_closed_form(n: int, gpr: int) -> int:
    """Closed form for sigma(M(G,n))."""
    return 25 * n * n - 68 * n - 78 - 8 * gpr


SAMPLE_GROUPS: dict[str, Presentation] = {
    "trivial": Presentation(),
    "Z": parse_presentation("< x | >"),
    "ZxZ": parse_presentation("< x, y | [x,y] >"),
    "Z2Z3": parse_presentation("< x, y | x^2, y^3 >"),
    "genus2": surface_group(2),
}


@dataclass(frozen=True)
class ConstructionReport:
    block: Block
    formula_chi: int
    formula_sigma: int
    match: bool
    notes: tuple[str, ...] = ()


@lru_cache(maxsize=None)
def build_A() -> Block:
    """The middle piece: two copies of S11 glued along their genus-2
    surfaces, carrying the tori as T1 and T2.  The complement of the carried
    union stays simply connected, which is what the free-product rule needs."""
    a = fiber_sum(blocks.s11(), blocks.s11(),
                  GluingSpec("F", "F",
                             carry_left=(("T", "T1"),),
                             carry_right=(("T", "T2"),)))
    return replace(a, name="A")


@lru_cache(maxsize=None)
def build_Z(n: int) -> Block:
    """Glue the elbow to the fibration block along the genus-(15n+1)
    surfaces; connect the elbow fiber with the section into K and carry Tp."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    m = 15 * n + 1
    z = fiber_sum(blocks.elbow(m), blocks.stipsicz(n),
                  GluingSpec("D", "F",
                             connect=("F", "T"), connect_label="K",
                             carry_left=("Tp",)))
    return replace(z, name=f"Z({n})")


def build_J(n: int) -> MarkedSurface:
    """Resolve n+3 fibers and one section of E(n+5) into a single surface J
    of genus n+3 and square n+1; its complement is recorded as simply
    connected with trivial meridian."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    e = blocks.elliptic(n + 5)
    fiber = e.surfaces["F"]
    section = e.surfaces["S"]
    k = n + 3
    components = tuple((fiber.genus, fiber.self_intersection) for _ in range(k))
    components += ((section.genus, section.self_intersection),)
    pairings = []
    for i in range(k + 1):
        row = [0] * (k + 1)
        if i < k:
            row[k] = 1
        else:
            row = [1] * k + [0]
        pairings.append(tuple(row))
    shape = resolve_intersections(IntersectionConfig(components, tuple(pairings)))
    std = surface_group(shape.genus).generators
    return MarkedSurface(
        label="J",
        genus=shape.genus,
        self_intersection=shape.self_intersection,
        symplectic=True,
        normal_bundle_trivial=(shape.self_intersection == 0),
        inclusion=trivial_hom(surface_group(shape.genus), e.pi1),
        complement=ComplementData(
            group=Presentation(),
            surface_images={g: IDENTITY for g in std},
            meridian=IDENTITY,
        ),
    )


@lru_cache(maxsize=None)
def elliptic_with_J(n: int) -> Block:
    """E(n+5) remarked with the resolved surface J as its only surface."""
    e = blocks.elliptic(n + 5)
    j = build_J(n)
    prov = dict(e.provenance)
    prov["surfaces.J"] = ("derived genus/square (resolve); recorded simply "
                          "connected complement with trivial meridian")
    prov.pop("surfaces.F", None)
    prov.pop("surfaces.S", None)
    b = Block(name=f"{e.name}+J", chi=e.chi, sigma=e.sigma, pi1=e.pi1,
              surfaces={"J": j}, provenance=prov, flags=e.flags)
    report = blocks.validate(b)
    if not report.ok:
        raise ValueError("; ".join(report.violations))
    return b


@lru_cache(maxsize=None)
def build_ZE(n: int) -> Block:
    """Glue Z(n) to E(n+5) along K and J, carrying Tp.  This is the piece
    whose torus quotient feeds the free-product rule."""
    ze = fiber_sum(build_Z(n), elliptic_with_J(n),
                   GluingSpec("K", "J", carry_left=("Tp",)))
    return replace(ze, name=f"Z({n})#E({n + 5})")


@lru_cache(maxsize=None)
def build_W(n: int) -> Block:
    """The simply connected family member W(n), carrying the torus T2 whose
    complement record stays simply connected by construction."""
    w = fiber_sum(build_A(), build_ZE(n),
                  GluingSpec("T1", "Tp", carry_left=("T2",)))
    return replace(w, name=f"W({n})")


@lru_cache(maxsize=None)
def build_MGn(presentation: Presentation, n: int) -> ConstructionReport:
    """Torus sum of M(G) with W(n), compared against the closed forms.

    The group of the result is computed with the free-product rule through
    the middle-piece data: kill the torus images on both outer pieces and
    take the free product of the quotients.
    """
    mg = blocks.MG(presentation)
    w = build_W(n)
    m = fiber_sum(mg, w, GluingSpec("T0", "T2"))
    pi1 = free_product_rule(mg, build_ZE(n), "T0", "Tp")
    prov = dict(m.provenance)
    prov["pi1"] = ("engine (free-product rule through the middle-piece "
                   "torus data)")
    m = replace(m, name=f"M(G,{n})", pi1=pi1, provenance=prov)
    g, r = presentation.rank_data
    gpr = g + r + 1
    fchi = chi_closed_form(n, gpr)
    fsigma = sigma_closed_form(n, gpr)
    notes = [
        "sum order: A-side complement data composed through Z#E first; "
        "chi and sigma are association-independent",
        "basis identification: identity throughout",
    ]
    if n <= 1:
        notes.append(f"n = {n} is outside the stated range n > 1 of the "
                     f"closed-form family; totals reported for reference")
    return ConstructionReport(
        block=m,
        formula_chi=fchi,
        formula_sigma=fsigma,
        match=(m.chi == fchi and m.sigma == fsigma),
        notes=tuple(notes),
    )


def recorded_carried_torus_map(z: Block) -> GroupHom:
    """The recorded inclusion data for the carried torus of Z(n), kept as
    given: a1 maps to the central generator a, b1 dies.  The engine computes
    its own images (b and s1) independently; only abelianized consistency of
    this recorded map is certified."""
    if "a" not in z.pi1.generators:
        raise ValueError("block group has no generator named a")
    return GroupHom(surface_group(1), z.pi1, {"a1": gen("a"), "b1": IDENTITY})


def clear_caches() -> None:
    for fn in (build_A, build_Z, elliptic_with_J, build_ZE, build_W, build_MGn):
        fn.cache_clear()
    blocks.clear_caches()
