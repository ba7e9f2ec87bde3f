"""Derived Chern-number analytics for blocks and quadratic families.

All arithmetic here is exact: integers and fractions only, no floating
point.  For a closed block with Euler characteristic chi and signature
sigma the derived quantities are

    c1^2   = 2 chi + 3 sigma
    chi_h  = (chi + sigma) / 4        (an integer for valid blocks)
    slope  = c1^2 / chi_h             (undefined when chi_h = 0)

together with the defects against the two bounding lines

    bmy_defect     = 9 chi_h - c1^2      (>= 0 on or below the slope-9 line)
    noether_defect = c1^2 - 2 chi_h + 6.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .blocks import Block

__all__ = [
    "GeographyPoint",
    "QuadraticFamily",
    "FamilyBehavior",
    "point",
    "f_value",
    "family_behavior",
    "slope_limit",
    "main_family",
    "RECORDED_FACTS",
]

# Recorded facts carried as annotations on family reports; these are inputs,
# never computed here.
RECORDED_FACTS = (
    "recorded: the finiteness domain of chi + b*sigma always contains [-1, 1] "
    "and lies in (-inf, 1]; for minimal blocks it contains [-1, 3/2] and lies "
    "in (-inf, 3/2]",
    "recorded: the upper endpoints 1 and 3/2 are attained",
)


@dataclass(frozen=True)
class GeographyPoint:
    name: str
    chi: int
    sigma: int
    c1sq: int
    chi_h: int
    bmy_defect: int
    noether_defect: int
    slope: Fraction | None  # None when chi_h = 0

    def slope_str(self) -> str:
        if self.slope is None:
            return "-"
        return f"{self.slope.numerator}/{self.slope.denominator}"


def point(b: Block) -> GeographyPoint:
    """Exact derived invariants of one block."""
    if (b.chi + b.sigma) % 4:
        raise ValueError(
            f"block {b.name!r} violates the upstream invariant: "
            f"chi + sigma = {b.chi + b.sigma} is not divisible by 4")
    c1sq = 2 * b.chi + 3 * b.sigma
    chi_h = (b.chi + b.sigma) // 4
    slope = Fraction(c1sq, chi_h) if chi_h else None
    return GeographyPoint(
        name=b.name,
        chi=b.chi,
        sigma=b.sigma,
        c1sq=c1sq,
        chi_h=chi_h,
        bmy_defect=9 * chi_h - c1sq,
        noether_defect=c1sq - 2 * chi_h + 6,
        slope=slope,
    )


def f_value(b: Block, beta) -> Fraction:
    """chi + beta * sigma, exactly."""
    return b.chi + Fraction(beta) * b.sigma


Triple = tuple[int, int, int]  # (quadratic, linear, constant) coefficients


@dataclass(frozen=True)
class QuadraticFamily:
    """A family of blocks whose invariants are quadratic polynomials in n,
    plus the coefficient each invariant carries on the group size g + r + 1."""

    name: str
    chi_poly: Triple
    sigma_poly: Triple
    chi_group: int = 0
    sigma_group: int = 0

    def chi_at(self, n: int, group_size: int = 1) -> int:
        a2, a1, a0 = self.chi_poly
        return a2 * n * n + a1 * n + a0 + self.chi_group * group_size

    def sigma_at(self, n: int, group_size: int = 1) -> int:
        b2, b1, b0 = self.sigma_poly
        return b2 * n * n + b1 * n + b0 + self.sigma_group * group_size

    def c1sq_poly(self, group_size: int = 1) -> tuple[Fraction, ...]:
        a, b = self.chi_poly, self.sigma_poly
        free = 2 * self.chi_group + 3 * self.sigma_group
        return tuple(Fraction(2 * x + 3 * y) for x, y in zip(a, b))[:2] + (
            Fraction(2 * a[2] + 3 * b[2] + free * group_size),)

    def chi_h_poly(self, group_size: int = 1) -> tuple[Fraction, ...]:
        a, b = self.chi_poly, self.sigma_poly
        free = self.chi_group + self.sigma_group
        coeffs = [Fraction(x + y, 4) for x, y in zip(a, b)]
        coeffs[2] += Fraction(free * group_size, 4)
        return tuple(coeffs)


def main_family(name: str = "theorem1") -> QuadraticFamily:
    """The closed-form family of the pipeline: chi = 75n^2+256n+130+12k,
    sigma = 25n^2-68n-78-8k with k = g + r + 1."""
    return QuadraticFamily(
        name=name,
        chi_poly=(75, 256, 130),
        sigma_poly=(25, -68, -78),
        chi_group=12,
        sigma_group=-8,
    )


@dataclass(frozen=True)
class FamilyBehavior:
    kind: str                 # "diverges_to_minus_infinity" | "bounded_below"
    witness_degree: int       # degree of the deciding coefficient
    witness: Fraction         # the deciding coefficient itself

    @property
    def diverges(self) -> bool:
        return self.kind == "diverges_to_minus_infinity"


def family_behavior(fam: QuadraticFamily, beta, group_size: int = 1) -> FamilyBehavior:
    """Classify the limit of chi(n) + beta * sigma(n) over the family.

    The sign of the leading coefficient decides; zeros fall through to the
    next coefficient.  A constant value is bounded below by itself.  The
    group size only shifts the constant term, so it never decides divergence.
    """
    beta = Fraction(beta)
    a2, a1, a0 = fam.chi_poly
    b2, b1, b0 = fam.sigma_poly
    coeffs = [
        (2, a2 + beta * b2),
        (1, a1 + beta * b1),
        (0, a0 + beta * b0 + (fam.chi_group + beta * fam.sigma_group) * group_size),
    ]
    for degree, c in coeffs:
        if c > 0:
            return FamilyBehavior("bounded_below", degree, Fraction(c))
        if c < 0:
            if degree == 0:
                return FamilyBehavior("bounded_below", 0, Fraction(c))
            return FamilyBehavior("diverges_to_minus_infinity", degree, Fraction(c))
    return FamilyBehavior("bounded_below", 0, Fraction(0))


def slope_limit(fam: QuadraticFamily, group_size: int = 1) -> Fraction:
    """Limit of c1^2(n) / chi_h(n): the ratio of the leading coefficients.

    Raises when chi_h is constant in n (no limit to speak of) or grows
    strictly slower than c1^2 (the ratio diverges).
    """
    c1 = fam.c1sq_poly(group_size)
    ch = fam.chi_h_poly(group_size)
    deg_ch = next((2 - i for i, c in enumerate(ch) if c), None)
    deg_c1 = next((2 - i for i, c in enumerate(c1) if c), None)
    if deg_ch is None or deg_ch == 0:
        raise ValueError(f"family {fam.name!r}: chi_h has no growth in n")
    if deg_c1 is not None and deg_c1 > deg_ch:
        raise ValueError(f"family {fam.name!r}: slope diverges")
    lead_ch = ch[2 - deg_ch]
    lead_c1 = c1[2 - deg_ch]
    return Fraction(lead_c1, lead_ch)
