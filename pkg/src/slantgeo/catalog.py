"""Built-in immersion catalog.

Entries are generators of immersion-description text, so everything funnels
through the parser exactly like user-supplied files.  The two eleven
dimensional entries carry their distribution declarations so that the
definition-driven suites run non-vacuously; curved_probe exists to exercise
every derivative code path on a non-flat immersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsl import ImmersionSpec, parse_spec


@dataclass(frozen=True)
class Slot:
    name: str
    default: float
    doc: str


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    slots: tuple[Slot, ...]
    summary: str

    def text(self, **values: float) -> str:
        unknown = set(values) - {s.name for s in self.slots}
        if unknown:
            raise KeyError(f"unknown parameter(s) {sorted(unknown)} for {self.name}")
        args = {s.name: values.get(s.name, s.default) for s in self.slots}
        return _BUILDERS[self.name](**args)

    def build(self, **values: float) -> ImmersionSpec:
        return parse_spec(self.text(**values))


def _example_3_3(theta1: float, theta2: float) -> str:
    return f"""\
# bi-slant blocks (u, s) and (w, k) plus an invariant block (t, r) in R^11
ambient 11
params u s w k t r z
const theta1 = {theta1!r}
const theta2 = {theta2!r}
map {{
  x1 = u
  y1 = s*cos(theta1)
  y2 = s*sin(theta1)
  x3 = w
  y3 = k*cos(theta2)
  y4 = k*sin(theta2)
  x5 = t
  y5 = r
  z = z
}}
distribution D1 {{ (1,0,0,0,0,0,0), (0,1,0,0,0,0,0) }}
distribution D2 {{ (0,0,1,0,0,0,0), (0,0,0,1,0,0,0) }}
distribution D  {{ (0,0,0,0,1,0,0), (0,0,0,0,0,1,0) }}
"""


def _example_5_5(alpha: float) -> str:
    return f"""\
# invariant block (u, v), a pi/4 slant block (t, r), an alpha slant block (s, k)
ambient 11
params u v t r s k z
const alpha = {alpha!r}
const c = 1/sqrt(2)
map {{
  x1 = u
  y1 = v
  x2 = t
  y2 = c*r
  x3 = c*r
  x4 = s
  y4 = k*cos(alpha)
  x5 = k*sin(alpha)
  z = z
}}
distribution D  {{ (1,0,0,0,0,0,0), (0,1,0,0,0,0,0) }}
distribution D1 {{ (0,0,1,0,0,0,0), (0,0,0,1,0,0,0) }}
distribution D2 {{ (0,0,0,0,1,0,0), (0,0,0,0,0,1,0) }}
"""


def _invariant_plane(n: float) -> str:
    n = int(n)
    if n < 1:
        raise ValueError("invariant_plane needs n >= 1")
    return f"""\
ambient {2 * n + 1}
params u v z
map {{ x1 = u; y1 = v; z = z }}
distribution D {{ (1,0,0), (0,1,0) }}
"""


def _curved_probe() -> str:
    return """\
# curvature probe: one parabolic coordinate makes h, A and the projector jets nonzero
ambient 5
params u v z
map { x1 = u; y1 = v; x2 = u^2/2; z = z }
"""


_BUILDERS = {
    "example_3_3": _example_3_3,
    "example_5_5": _example_5_5,
    "invariant_plane": _invariant_plane,
    "curved_probe": _curved_probe,
}

ENTRIES: tuple[CatalogEntry, ...] = (
    CatalogEntry(
        name="example_3_3",
        slots=(Slot("theta1", math.pi / 6, "first slant angle, radians, in (0, pi/2)"),
               Slot("theta2", math.pi / 3, "second slant angle, radians, in (0, pi/2)")),
        summary="proper quasi bi-slant 7-fold in R^11 with declared D, D1, D2"),
    CatalogEntry(
        name="example_5_5",
        slots=(Slot("alpha", 0.7, "slant angle of D2, radians, in (0, pi/2)"),),
        summary="proper quasi bi-slant 7-fold in R^11 with theta1 = pi/4 built in"),
    CatalogEntry(
        name="invariant_plane",
        slots=(Slot("n", 2, "ambient half-dimension"),),
        summary="identity embedding of an invariant plane plus the Reeb axis"),
    CatalogEntry(
        name="curved_probe",
        slots=(),
        summary="curved surface with non-constant slant spectrum (outside taxonomy)"),
)


def get_entry(name: str) -> CatalogEntry:
    for entry in ENTRIES:
        if entry.name == name:
            return entry
    raise KeyError(f"unknown catalog entry {name!r}; "
                   f"known: {', '.join(e.name for e in ENTRIES)}")


# ---------------------------------------------------------------------------
# Taxonomy variant family

TAXONOMY_ROWS = ("invariant", "anti_invariant", "semi_invariant", "slant",
                 "semi_slant", "hemi_slant", "bi_slant", "proper_quasi_bi_slant")


def taxonomy_variant(row: str, theta1: float = math.pi / 6,
                     theta2: float = math.pi / 3) -> str:
    """Immersion text whose slant spectrum lands on one taxonomy row.

    Building blocks inside R^11: an invariant pair (x_i, y_i), an
    anti-invariant line along a single y_i, and slant pairs with a chosen
    angle.  The hemi-slant variant realizes its right-angle factor with the
    anti-invariant line, matching the convention that anti-invariant means
    slant angle pi/2.
    """
    maps = {
        "invariant": ("params u v z",
                      "map { x1 = u; y1 = v; z = z }"),
        "anti_invariant": ("params u z",
                           "map { y1 = u; z = z }"),
        "semi_invariant": ("params u v w z",
                           "map { x1 = u; y1 = v; y2 = w; z = z }"),
        "slant": ("params u s z",
                  "map { x1 = u; y1 = s*cos(t1); y2 = s*sin(t1); z = z }"),
        "semi_slant": ("params u v w k z",
                       "map { x1 = u; y1 = v; x3 = w; y3 = k*cos(t1); y4 = k*sin(t1); z = z }"),
        "hemi_slant": ("params u s w z",
                       "map { x1 = u; y1 = s*cos(t2); y2 = s*sin(t2); y3 = w; z = z }"),
        "bi_slant": ("params u s w k z",
                     "map { x1 = u; y1 = s*cos(t1); y2 = s*sin(t1); "
                     "x3 = w; y3 = k*cos(t2); y4 = k*sin(t2); z = z }"),
        "proper_quasi_bi_slant": ("params u s w k t r z",
                                  "map { x1 = u; y1 = s*cos(t1); y2 = s*sin(t1); "
                                  "x3 = w; y3 = k*cos(t2); y4 = k*sin(t2); "
                                  "x5 = t; y5 = r; z = z }"),
    }
    if row not in maps:
        raise KeyError(f"unknown taxonomy row {row!r}; known: {', '.join(TAXONOMY_ROWS)}")
    params, body = maps[row]
    return (f"ambient 11\n{params}\n"
            f"const t1 = {theta1!r}\nconst t2 = {theta2!r}\n{body}\n")


# ---------------------------------------------------------------------------
# Seeded random immersions


def random_immersion_text(seed: int, n: int, m: int) -> str:
    """Smooth polynomial/trig immersion of an m-dimensional box into R^(2n+1).

    Each non-Reeb parameter owns one ambient slot with unit coefficient, the
    last parameter is glued to the z axis, and every other appearance is a
    small-amplitude perturbation in the other parameters, so the Jacobian
    stays uniformly full rank and the Reeb direction stays exactly tangent.
    """
    if not 2 <= m <= 2 * n:
        raise ValueError("need 2 <= m <= 2n so a z parameter and slots fit")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, m]))
    free = m - 1  # parameters other than z
    names = [f"u{i + 1}" for i in range(free)] + ["z"]
    slots = list(rng.permutation(2 * n)[:free])
    terms: dict[int, list[str]] = {s: [names[i]] for i, s in enumerate(slots)}

    def perturbation() -> str:
        j = int(rng.integers(0, free))
        coeff = float(np.round(rng.uniform(0.1, 0.3), 3))
        kind = int(rng.integers(0, 4))
        u = names[j]
        if kind == 0:
            return f"{coeff!r}*sin({u})"
        if kind == 1:
            return f"{coeff!r}*cos({u})"
        if kind == 2:
            return f"{coeff!r}*{u}^2"
        k = int(rng.integers(0, free))
        return f"{coeff!r}*{u}*{names[k]}"

    for s in range(2 * n):
        extra = int(rng.integers(0, 3)) if s in terms else int(rng.integers(0, 2))
        bucket = terms.setdefault(s, [])
        for _ in range(extra):
            bucket.append(perturbation())

    lines = [f"ambient {2 * n + 1}", "params " + " ".join(names), "map {"]
    for s in sorted(terms):
        if not terms[s]:
            continue
        if s == 2 * n:
            continue
        i, rem = divmod(s, 2)
        coord = f"{'x' if rem == 0 else 'y'}{i + 1}"
        lines.append(f"  {coord} = " + " + ".join(terms[s]))
    lines.append("  z = z")
    lines.append("}")
    return "\n".join(lines) + "\n"


def random_immersions(count: int = 20, seed: int = 0) -> list[ImmersionSpec]:
    """The seeded gauntlet family: half into R^7, half into R^11."""
    specs = []
    for i in range(count):
        n = 3 if i % 2 == 0 else 5
        m = 3 + (i % 3) if n == 3 else 4 + (i % 4)
        specs.append(parse_spec(random_immersion_text(seed + i, n, m)))
    return specs
