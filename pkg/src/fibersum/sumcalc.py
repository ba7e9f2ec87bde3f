"""The fiber-sum engine.

``fiber_sum`` combines two blocks along marked surfaces of equal genus and
opposite squares: Euler characteristics add up to the gluing correction
4g - 4, signatures add outright (additivity is an axiom of the calculus; no
correction term is modeled), and the fundamental group is computed at the
presentation level from the complement data of the two gluing surfaces.

Complement bookkeeping: when a gluing surface has no complement record the
engine falls back to the closed group with a trivial meridian and flags the
result as model-dependent.  Carried surfaces always keep (genus, square); a
carried surface keeps full complement data exactly when the gluing record on
its side removed it too, and otherwise keeps at most name-lifted inclusion
images (also flagged).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, NamedTuple

from . import blocks as blockmod
from .blocks import Block, ComplementData, MarkedSurface
from .fpgroup import (
    IDENTITY,
    GroupHom,
    Presentation,
    Word,
    free_product,
    fresh_name,
    gen,
    quotient_by_normal_closure,
    surface_group,
)

__all__ = [
    "GluingError",
    "SignedPermutation",
    "GluingSpec",
    "IntersectionConfig",
    "SurfaceShape",
    "fiber_sum",
    "free_product_rule",
    "resolve_intersections",
    "mirror",
]


class GluingError(ValueError):
    """A fiber-sum or resolve precondition failed."""


@dataclass(frozen=True)
class SignedPermutation:
    """A permutation with signs on the 2g surface-basis generators:
    index i maps to generator perm[i] with exponent signs[i]."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)) or len(self.signs) != n:
            raise GluingError(f"not a signed permutation: {self.perm}, {self.signs}")
        if any(s not in (1, -1) for s in self.signs):
            raise GluingError("signs must be +1 or -1")

    @classmethod
    def identity(cls, size: int) -> "SignedPermutation":
        return cls(tuple(range(size)), (1,) * size)

    def inverse(self) -> "SignedPermutation":
        n = len(self.perm)
        perm = [0] * n
        signs = [1] * n
        for i, j in enumerate(self.perm):
            perm[j] = i
            signs[j] = self.signs[i]
        return SignedPermutation(tuple(perm), tuple(signs))

    def __call__(self, i: int) -> tuple[int, int]:
        return self.perm[i], self.signs[i]


CarryEntry = tuple[str, str]  # (label in the summand, label in the result)


def _normalize_carry(entries) -> tuple[CarryEntry, ...]:
    out: list[CarryEntry] = []
    for e in entries:
        if isinstance(e, str):
            out.append((e, e))
        else:
            old, new = e
            out.append((str(old), str(new)))
    return tuple(out)


@dataclass(frozen=True)
class GluingSpec:
    """Which surfaces to glue, which to connect, which to carry.

    ``identification`` defaults to the identity on the chosen symplectic
    basis; all reports name the identification used.  ``connect`` names one
    surface on each side meeting its gluing surface once transversally; the
    connected sum of the two becomes a new surface ``connect_label`` in the
    result.  Carried surfaces are declared explicitly (the engine does not
    infer disjointness) as labels or (label, new_label) pairs.
    """

    left: str
    right: str
    identification: SignedPermutation | None = None
    connect: tuple[str, str] | None = None
    connect_label: str = "K"
    carry_left: tuple = ()
    carry_right: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "carry_left", _normalize_carry(self.carry_left))
        object.__setattr__(self, "carry_right", _normalize_carry(self.carry_right))


def mirror(g: GluingSpec) -> GluingSpec:
    """The same gluing seen from the other side."""
    return GluingSpec(
        left=g.right,
        right=g.left,
        identification=None if g.identification is None else g.identification.inverse(),
        connect=None if g.connect is None else (g.connect[1], g.connect[0]),
        connect_label=g.connect_label,
        carry_left=g.carry_right,
        carry_right=g.carry_left,
    )


# ---------------------------------------------------------------------------
# Complement-side preparation
# ---------------------------------------------------------------------------

@dataclass
class _RemovedSurface:
    label: str
    images: dict[str, Word]   # standard basis -> word over the ambient group
    meridian: Word


@dataclass
class _Side:
    ambient: Presentation
    images: dict[str, Word]   # gluing-surface basis -> word over ambient
    meridian: Word
    removed: list[_RemovedSurface]
    fallback: bool


def _side_data(b: Block, surf: MarkedSurface) -> _Side:
    c = surf.complement
    if c is not None:
        removed = [_RemovedSurface(lab, dict(c.co_images[lab]), c.co_meridians[lab])
                   for lab in c.also_removed]
        return _Side(c.group, dict(c.surface_images), c.meridian, removed, False)
    if surf.inclusion is None:
        raise GluingError(
            f"surface {surf.label!r} of block {b.name!r} has neither complement "
            f"nor inclusion data; cannot glue along it")
    return _Side(b.pi1, dict(surf.inclusion.images), IDENTITY, [], True)


def _rename_word(w: Word, images: Mapping[str, Word]) -> Word:
    return w.substituted(images) if images else w


def _rename_side(side: _Side, taken: set[str]) -> tuple[_Side, dict[str, str]]:
    renames: dict[str, str] = {}
    for g in side.ambient.generators:
        new = fresh_name(g, taken)
        taken.add(new)
        if new != g:
            renames[g] = new
    if not renames:
        return side, {}
    sub = {old: gen(new) for old, new in renames.items()}
    ambient = side.ambient.renamed(renames)
    images = {k: _rename_word(w, sub) for k, w in side.images.items()}
    removed = [_RemovedSurface(r.label,
                               {k: _rename_word(w, sub) for k, w in r.images.items()},
                               _rename_word(r.meridian, sub))
               for r in side.removed]
    return _Side(ambient, images, _rename_word(side.meridian, sub),
                 removed, side.fallback), renames


def _new_relators(words: Iterable[Word]) -> tuple[Word, ...]:
    out = []
    for w in words:
        w = w.cyclically_reduced()
        if w:
            out.append(w)
    return tuple(out)


def _name_lift(images: Mapping[str, Word], generators: tuple[str, ...],
               rename: Mapping[str, str]) -> dict[str, Word] | None:
    """Reinterpret closed-group image words over the result generators,
    renaming where the right side was renamed.  Returns None when some name
    does not survive into the result."""
    known = set(generators)
    sub = {old: gen(new) for old, new in rename.items()}
    out = {}
    for k, w in images.items():
        w = _rename_word(w, sub)
        if not all(g in known for g, _ in w.letters):
            return None
        out[k] = w
    return out


def fiber_sum(x: Block, y: Block, gspec: GluingSpec) -> Block:
    """Symplectic fiber sum of two blocks along marked surfaces.

    chi(result) = chi(x) + chi(y) + 4g - 4 for gluing genus g; signatures
    add.  The group of the result is presented by the generators and
    relators of both complement groups together with the basis
    identification relators and the meridian relator.
    """
    fx = x.surface(gspec.left)
    fy = y.surface(gspec.right)
    if fx.genus != fy.genus:
        raise GluingError(
            f"gluing genus mismatch: {x.name}:{fx.label} has genus {fx.genus}, "
            f"{y.name}:{fy.label} has genus {fy.genus}")
    if fx.self_intersection + fy.self_intersection != 0:
        raise GluingError(
            f"gluing squares must be opposite: {fx.self_intersection} + "
            f"{fy.self_intersection} != 0")
    if not (fx.symplectic and fy.symplectic):
        raise GluingError("both gluing surfaces must be symplectic")
    g = fx.genus

    flags: list[str] = []
    for f in x.flags + y.flags:
        if f not in flags:
            flags.append(f)
    if fx.self_intersection != 0:
        flags.append(
            f"nonzero-square gluing ({fx.self_intersection}/{fy.self_intersection}): "
            f"signature additivity assumed without correction term")

    # Surface bookkeeping checks (labels exist, no double use, no collisions).
    consumed_left = {gspec.left}
    consumed_right = {gspec.right}
    if gspec.connect is not None:
        cl, cr = gspec.connect
        el, er = x.surface(cl), y.surface(cr)
        if gspec.left not in el.transverse_to:
            raise GluingError(
                f"connect surface {cl!r} of {x.name} is not marked transverse "
                f"to the gluing surface {gspec.left!r}")
        if gspec.right not in er.transverse_to:
            raise GluingError(
                f"connect surface {cr!r} of {y.name} is not marked transverse "
                f"to the gluing surface {gspec.right!r}")
        consumed_left.add(cl)
        consumed_right.add(cr)
    new_labels: set[str] = set()
    for entries, b, consumed in ((gspec.carry_left, x, consumed_left),
                                 (gspec.carry_right, y, consumed_right)):
        for old, new in entries:
            b.surface(old)  # raises on missing label
            if old in consumed:
                raise GluingError(
                    f"surface {old!r} of {b.name} is already used by the gluing "
                    f"and cannot be carried")
            if new in new_labels:
                raise GluingError(f"carried surfaces collide on label {new!r}")
            new_labels.add(new)
    if gspec.connect is not None and gspec.connect_label in new_labels:
        raise GluingError(f"connected surface label {gspec.connect_label!r} "
                          f"collides with a carried label")

    chi = x.chi + y.chi + 4 * g - 4
    sigma = x.sigma + y.sigma

    left = _side_data(x, fx)
    right = _side_data(y, fy)
    if left.fallback:
        flags.append(f"model-dependent pi1: no complement data for "
                     f"{x.name}:{gspec.left}, fell back to the closed group "
                     f"with trivial meridian")
    if right.fallback:
        flags.append(f"model-dependent pi1: no complement data for "
                     f"{y.name}:{gspec.right}, fell back to the closed group "
                     f"with trivial meridian")

    taken = set(left.ambient.generators)
    right, rename = _rename_side(right, taken)
    if rename:
        flags.append("renamed right-side generators: "
                     + ", ".join(f"{a}->{b}" for a, b in sorted(rename.items())))

    std = surface_group(g).generators
    rho = gspec.identification or SignedPermutation.identity(2 * g)
    if len(rho.perm) != 2 * g:
        raise GluingError(f"identification acts on {len(rho.perm)} generators, "
                          f"gluing genus {g} needs {2 * g}")
    ident = []
    for i, name in enumerate(std):
        j, s = rho(i)
        rw = right.images[std[j]]
        if s == -1:
            rw = rw.inverse()
        ident.append(left.images[name] * rw.inverse())
    merid_rel = left.meridian * right.meridian

    gens = left.ambient.generators + right.ambient.generators
    raw_relators = (left.ambient.relators + right.ambient.relators
                    + _new_relators(ident) + _new_relators([merid_rel]))
    # raw presents the result minus every co-removed surface
    raw = Presentation._trusted(gens, raw_relators)

    all_removed = left.removed + right.removed
    pi1 = Presentation._trusted(
        gens, raw.relators + _new_relators(r.meridian for r in all_removed))

    carried_map_left = dict(gspec.carry_left)
    carried_map_right = dict(gspec.carry_right)
    removed_left_labels = {r.label for r in left.removed}
    removed_right_labels = {r.label for r in right.removed}

    def carried_new_labels(side_removed, carried_map):
        return {r.label: carried_map[r.label] for r in side_removed
                if r.label in carried_map}

    surfaces: dict[str, MarkedSurface] = {}

    def build_carried(b: Block, old: str, new: str, side: _Side,
                      side_rename: Mapping[str, str], carried_map,
                      removed_labels: set[str]) -> MarkedSurface:
        s = b.surfaces[old]
        same_side_carries = carried_map
        transverse = tuple(same_side_carries[t] for t in s.transverse_to
                           if t in same_side_carries)
        if old in removed_labels:
            mine = next(r for r in side.removed if r.label == old)
            # split the other removed surfaces into carried (stay removed in
            # the record) and forgotten (their meridians get glued back)
            kept, forgotten = [], []
            for r in left.removed:
                if r is mine:
                    continue
                (kept if r.label in carried_map_left else forgotten).append(
                    (r, carried_map_left.get(r.label)))
            for r in right.removed:
                if r is mine:
                    continue
                (kept if r.label in carried_map_right else forgotten).append(
                    (r, carried_map_right.get(r.label)))
            group = Presentation._trusted(
                gens, raw.relators + _new_relators(r.meridian for r, _ in forgotten))
            comp = ComplementData(
                group=group,
                surface_images=dict(mine.images),
                meridian=mine.meridian,
                also_removed=tuple(lab for _, lab in kept),
                co_images={lab: dict(r.images) for r, lab in kept},
                co_meridians={lab: r.meridian for r, lab in kept},
            )
            inclusion = GroupHom(surface_group(s.genus), pi1, dict(mine.images))
            return replace(s, label=new, inclusion=inclusion, complement=comp,
                           transverse_to=transverse)
        # not part of the removed set: at best a name-lift of the inclusion
        inclusion = None
        if s.inclusion is not None:
            lifted = _name_lift(s.inclusion.images, pi1.generators, side_rename)
            if lifted is not None:
                inclusion = GroupHom(surface_group(s.genus), pi1, lifted)
                flags.append(f"carried surface {new!r}: inclusion images "
                             f"lifted by name from {b.name} (model-dependent)")
            else:
                flags.append(f"carried surface {new!r}: inclusion data dropped "
                             f"(images not expressible in the result group)")
        if s.complement is not None:
            flags.append(f"carried surface {new!r}: complement data dropped "
                         f"(not part of the gluing complement record)")
        return replace(s, label=new, inclusion=inclusion, complement=None,
                       transverse_to=transverse)

    for old, new in gspec.carry_left:
        surfaces[new] = build_carried(x, old, new, left, {},
                                      carried_map_left, removed_left_labels)
    for old, new in gspec.carry_right:
        surfaces[new] = build_carried(y, old, new, right, rename,
                                      carried_map_right, removed_right_labels)

    if gspec.connect is not None:
        cl, cr = gspec.connect
        el, er = x.surfaces[cl], y.surfaces[cr]
        kg = el.genus + er.genus
        ksq = el.self_intersection + er.self_intersection
        inclusion = None
        left_imgs = (None if el.inclusion is None
                     else _name_lift(el.inclusion.images, pi1.generators, {}))
        right_imgs = (None if er.inclusion is None
                      else _name_lift(er.inclusion.images, pi1.generators, rename))
        if left_imgs is not None and right_imgs is not None:
            images = {}
            std_k = surface_group(kg).generators
            std_l = surface_group(el.genus).generators
            std_r = surface_group(er.genus).generators
            for i, name in enumerate(std_l):
                images[std_k[i]] = left_imgs[name]
            for i, name in enumerate(std_r):
                images[std_k[2 * el.genus + i]] = right_imgs[name]
            inclusion = GroupHom(surface_group(kg), pi1, images)
            flags.append(f"connected surface {gspec.connect_label!r}: inclusion "
                         f"images lifted by name (model-dependent)")
        else:
            flags.append(f"connected surface {gspec.connect_label!r}: no "
                         f"inclusion data")
        surfaces[gspec.connect_label] = MarkedSurface(
            label=gspec.connect_label,
            genus=kg,
            self_intersection=ksq,
            symplectic=True,
            normal_bundle_trivial=(ksq == 0),
            inclusion=inclusion,
        )

    rho_note = ("identity" if gspec.identification is None
                else f"perm={rho.perm} signs={rho.signs}")
    result = Block(
        name=f"({x.name} # {y.name})",
        chi=chi,
        sigma=sigma,
        pi1=pi1,
        surfaces=surfaces,
        provenance={
            "chi": "engine (Euler additivity with gluing correction)",
            "sigma": "engine (signature additivity axiom)",
            "pi1": "engine (presentation-level gluing, basis identification "
                   + rho_note + ")",
        },
        flags=tuple(flags),
    )
    report = blockmod.validate(result)
    if not report.ok:
        raise GluingError(f"fiber sum produced an invalid block: "
                          + "; ".join(report.violations))
    return result


def free_product_rule(b: Block, c: Block, tb: str, tc: str) -> Presentation:
    """Group of a sum through a middle piece whose complement of two disjoint
    square-zero tori is simply connected: kill the torus images on each side
    and take the free product of the quotients."""
    sb, sc = b.surface(tb), c.surface(tc)
    for blk, s in ((b, sb), (c, sc)):
        if s.genus != 1 or s.self_intersection != 0:
            raise GluingError(
                f"surface {s.label!r} of {blk.name} is not a square-zero torus")
        if s.inclusion is None:
            raise GluingError(
                f"surface {s.label!r} of {blk.name} has no inclusion data")
    qb = quotient_by_normal_closure(
        b.pi1, [sb.inclusion.images["a1"], sb.inclusion.images["b1"]])
    qc = quotient_by_normal_closure(
        c.pi1, [sc.inclusion.images["a1"], sc.inclusion.images["b1"]])
    return free_product(qb, qc).presentation


# ---------------------------------------------------------------------------
# Resolving transverse intersections
# ---------------------------------------------------------------------------

class SurfaceShape(NamedTuple):
    genus: int
    self_intersection: int


@dataclass(frozen=True)
class IntersectionConfig:
    """Components (genus, square) and a symmetric matrix of transverse
    intersection counts with zero diagonal."""

    components: tuple[tuple[int, int], ...]
    pairings: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        c = len(self.components)
        components = tuple((int(g), int(s)) for g, s in self.components)
        pairings = tuple(tuple(int(v) for v in row) for row in self.pairings)
        if len(pairings) != c or any(len(row) != c for row in pairings):
            raise GluingError(f"pairing matrix must be {c}x{c}")
        for i in range(c):
            if pairings[i][i]:
                raise GluingError("pairing matrix must have zero diagonal")
            for j in range(c):
                if pairings[i][j] < 0:
                    raise GluingError("pairing counts must be nonnegative")
                if pairings[i][j] != pairings[j][i]:
                    raise GluingError("pairing matrix must be symmetric")
        for g, _ in components:
            if g < 0:
                raise GluingError("component genus must be nonnegative")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "pairings", pairings)

    def is_connected(self) -> bool:
        c = len(self.components)
        if c == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in range(c):
                if self.pairings[i][j] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == c


def resolve_intersections(cfg: IntersectionConfig) -> SurfaceShape:
    """Smooth all transverse double points of a connected configuration.

    With c components, total intersection count d, genera gi and squares si:
    genus = sum gi + d - c + 1 and square = sum si + 2d.
    """
    if not cfg.is_connected():
        raise GluingError("configuration graph is not connected")
    c = len(cfg.components)
    d = sum(cfg.pairings[i][j] for i in range(c) for j in range(i + 1, c))
    genus = sum(g for g, _ in cfg.components) + d - c + 1
    square = sum(s for _, s in cfg.components) + 2 * d
    return SurfaceShape(genus, square)
