"""Strict double categories given by their structure maps, with law checks,
the flip, and the two directed readings.  ``linsq`` is the flat instance
of commutative squares of rational matrices."""

import random
from dataclasses import dataclass
from typing import Callable

from .linalg import Matrix, CompatibilityError, is_injective, left_inverse


class NotComposable(ValueError):
    pass


@dataclass(frozen=True)
class Category:
    source: Callable
    target: Callable
    identity: Callable
    compose: Callable          # compose(g, f) = g after f


@dataclass(frozen=True)
class DoubleCategory:
    """(D, H, V, B).  Squares d have horizontal edges s_dh(d) (top) and
    r_dh(d) (bottom) and vertical edges s_dv(d) (left) and r_dv(d) (right).

    hcomp(d1, d2) glues d2 to the left of d1 (needs r_dv(d2) = s_dv(d1));
    vcomp(d1, d2) glues d2 on top of d1 (needs r_dh(d2) = s_dh(d1))."""
    h: Category
    v: Category
    s_dh: Callable
    r_dh: Callable
    s_dv: Callable
    r_dv: Callable
    i_dh: Callable             # horizontal arrow -> identity square in the vertical direction
    i_dv: Callable
    hcomp: Callable
    vcomp: Callable
    eq: Callable
    name: str = ""

    def h_composable(self, d1, d2):
        return self.eq(self.r_dv(d2), self.s_dv(d1))

    def v_composable(self, d1, d2):
        return self.eq(self.r_dh(d2), self.s_dh(d1))

    def h_compose(self, d1, d2):
        if not self.h_composable(d1, d2):
            raise NotComposable("squares do not share a vertical edge")
        return self.hcomp(d1, d2)

    def v_compose(self, d1, d2):
        if not self.v_composable(d1, d2):
            raise NotComposable("squares do not share a horizontal edge")
        return self.vcomp(d1, d2)


def flip(dc):
    """Swap the horizontal and vertical directions."""
    return DoubleCategory(
        h=dc.v, v=dc.h,
        s_dh=dc.s_dv, r_dh=dc.r_dv, s_dv=dc.s_dh, r_dv=dc.r_dh,
        i_dh=dc.i_dv, i_dv=dc.i_dh,
        hcomp=dc.vcomp, vcomp=dc.hcomp,
        eq=dc.eq, name=dc.name[5:-1] if dc.name.startswith("flip(") else "flip(%s)" % dc.name)


@dataclass(frozen=True)
class InternalCategory:
    """A directed reading: 2-morphisms between arrows of ``objects``."""
    objects: Category
    source: Callable
    target: Callable
    identity: Callable
    compose: Callable


def horizontalization(dc):
    """2-morphisms v1 => v2 between vertical arrows, composed side by side."""
    return InternalCategory(dc.v, dc.s_dv, dc.r_dv, dc.i_dv, dc.hcomp)


def verticalization(dc):
    """2-morphisms h1 => h2 between horizontal arrows, stacked."""
    return InternalCategory(dc.h, dc.s_dh, dc.r_dh, dc.i_dh, dc.vcomp)


def same_reading(a, b, squares, arrows, eq):
    """Compare two directed readings on sample squares and arrows."""
    for d in squares:
        if not (eq(a.source(d), b.source(d)) and eq(a.target(d), b.target(d))):
            return False
    for x in arrows:
        if not eq(a.identity(x), b.identity(x)):
            return False
    for d1, d2 in zip(squares, squares[1:]):
        if eq(a.target(d2), a.source(d1)):
            if not eq(a.compose(d1, d2), b.compose(d1, d2)):
                return False
    return True


# law checks -----------------------------------------------------------------

def corners(dc, d):
    """The four corner objects read off both ways; axiom (5) says they agree."""
    top, bottom, left, right = dc.s_dh(d), dc.r_dh(d), dc.s_dv(d), dc.r_dv(d)
    return {
        "top-left": (dc.v.source(left), dc.h.source(top)),
        "bottom-right": (dc.v.target(right), dc.h.target(bottom)),
        "bottom-left": (dc.h.source(bottom), dc.v.target(left)),
        "top-right": (dc.v.source(right), dc.h.target(top)),
    }


def check_square_axiom(dc, d):
    return all(a == b for a, b in corners(dc, d).values())


def check_functoriality(dc, d1, d2):
    """Edges of composites are composites of edges, and identity squares
    compose as their edges.  d1, d2 must be horizontally composable."""
    comp = dc.h_compose(d1, d2)
    ok = dc.eq(dc.r_dh(comp), dc.h.compose(dc.r_dh(d1), dc.r_dh(d2)))
    ok &= dc.eq(dc.s_dh(comp), dc.h.compose(dc.s_dh(d1), dc.s_dh(d2)))
    ok &= dc.eq(dc.s_dv(comp), dc.s_dv(d2)) and dc.eq(dc.r_dv(comp), dc.r_dv(d1))
    h1, h2 = dc.s_dh(d1), dc.s_dh(d2)
    ok &= dc.eq(dc.i_dh(dc.h.compose(h1, h2)), dc.h_compose(dc.i_dh(h1), dc.i_dh(h2)))
    return bool(ok)


def check_units(dc, d):
    left = dc.h_compose(d, dc.i_dv(dc.s_dv(d)))
    right = dc.h_compose(dc.i_dv(dc.r_dv(d)), d)
    up = dc.v_compose(d, dc.i_dh(dc.s_dh(d)))
    down = dc.v_compose(dc.i_dh(dc.r_dh(d)), d)
    return all(dc.eq(x, d) for x in (left, right, up, down))


def check_associativity(dc, d1, d2, d3):
    """Horizontal: d3 | d2 | d1 from left to right."""
    a = dc.h_compose(dc.h_compose(d1, d2), d3)
    b = dc.h_compose(d1, dc.h_compose(d2, d3))
    return dc.eq(a, b)


def check_interchange(dc, d1, d2, d3, d4):
    """Grid with d4 | d3 on top and d2 | d1 below:
    (d1 o d2) . (d3 o d4) = (d1 . d3) o (d2 . d4)."""
    if not (dc.h_composable(d1, d2) and dc.h_composable(d3, d4)
            and dc.v_composable(d1, d3) and dc.v_composable(d2, d4)):
        raise NotComposable("grid is not composable both ways")
    a = dc.v_compose(dc.h_compose(d1, d2), dc.h_compose(d3, d4))
    b = dc.h_compose(dc.v_compose(d1, d3), dc.v_compose(d2, d4))
    return dc.eq(a, b)


# the instance of commutative squares of matrices ---------------------------

@dataclass(frozen=True)
class LinSquare:
    """right @ top = bottom @ left."""
    top: Matrix
    bottom: Matrix
    left: Matrix
    right: Matrix

    def __post_init__(self):
        if self.right @ self.top != self.bottom @ self.left:
            raise CompatibilityError("square does not commute")

    def edges(self):
        return (self.top, self.bottom, self.left, self.right)

    def to_json(self):
        return {k: getattr(self, k).to_json() for k in ("top", "bottom", "left", "right")}


def _mat_category():
    return Category(source=lambda f: f.cols, target=lambda f: f.rows,
                    identity=Matrix.identity, compose=lambda g, f: g @ f)


def _hcomp(d1, d2):
    return LinSquare(d1.top @ d2.top, d1.bottom @ d2.bottom, d2.left, d1.right)


def _vcomp(d1, d2):
    return LinSquare(d2.top, d1.bottom, d1.left @ d2.left, d1.right @ d2.right)


def _eq(a, b):
    return a == b


linsq = DoubleCategory(
    h=_mat_category(), v=_mat_category(),
    s_dh=lambda d: d.top, r_dh=lambda d: d.bottom,
    s_dv=lambda d: d.left, r_dv=lambda d: d.right,
    i_dh=lambda h: LinSquare(h, h, Matrix.identity(h.cols), Matrix.identity(h.rows)),
    i_dv=lambda v: LinSquare(Matrix.identity(v.cols), Matrix.identity(v.rows), v, v),
    hcomp=_hcomp, vcomp=_vcomp, eq=_eq, name="LinSq")


def transpose_square(d):
    """The flip of a LinSq square: horizontal and vertical edges exchanged."""
    return LinSquare(d.left, d.right, d.top, d.bottom)


class SquareRegistry:
    """Squares keyed by their edges; LinSq is flat, so a second square with
    the same edges is a duplicate."""

    def __init__(self):
        self._seen = set()

    def add(self, d):
        key = tuple(d.edges())
        if key in self._seen:
            raise ValueError("square with these edges already registered")
        self._seen.add(key)


# samplers -------------------------------------------------------------------

def _rand(rng, rows, cols):
    return Matrix([[rng.randint(-2, 2) for _ in range(cols)] for _ in range(rows)], cols)


def _rand_injective(rng, rows, cols):
    while True:
        m = _rand(rng, rows, cols)
        if is_injective(m):
            return m


def random_grid(rng, rows=2, cols=2, top=3):
    """A rows x cols grid of commuting squares, returned as grid[r][c] with r
    counted downwards and c to the right."""
    # vertical arrows are injective so the lower horizontal arrows can be solved for
    dims = [[None] * (cols + 1) for _ in range(rows + 1)]
    for c in range(cols + 1):
        dims[0][c] = rng.randint(0, top)
        for r in range(1, rows + 1):
            dims[r][c] = dims[r - 1][c] + rng.randint(0, 1)
    h = [[None] * cols for _ in range(rows + 1)]
    v = [[None] * (cols + 1) for _ in range(rows)]
    for c in range(cols):
        h[0][c] = _rand(rng, dims[0][c + 1], dims[0][c])
    for r in range(rows):
        for c in range(cols + 1):
            v[r][c] = _rand_injective(rng, dims[r + 1][c], dims[r][c])
    for r in range(rows):
        for c in range(cols):
            src = v[r][c]
            if src.cols:
                lft = left_inverse(src)
                free = _rand(rng, dims[r + 1][c + 1], dims[r + 1][c])
                h[r + 1][c] = (v[r][c + 1] @ h[r][c] @ lft
                               + free @ (Matrix.identity(src.rows) - src @ lft))
            else:
                h[r + 1][c] = _rand(rng, dims[r + 1][c + 1], dims[r + 1][c])
    grid = [[LinSquare(h[r][c], h[r + 1][c], v[r][c], v[r][c + 1]) for c in range(cols)]
            for r in range(rows)]
    if rng.random() < 0.5:
        # transposed grids exercise non-injective vertical edges
        grid = [[transpose_square(grid[r][c]) for r in range(rows)] for c in range(cols)]
    return grid


def law_report(seed=0, trials=500):
    """Run every law on seeded grids; one entry per law with trial and failure
    counts and the first failing witness."""
    rng = random.Random(seed)
    laws = ["interchange", "square-axiom", "functoriality", "units", "associativity",
            "flip-involution", "flip-readings"]
    out = {k: {"axiom": k, "trials": 0, "failures": 0, "first_witness": None} for k in laws}

    def record(name, ok, witness):
        e = out[name]
        e["trials"] += 1
        if not ok:
            e["failures"] += 1
            if e["first_witness"] is None:
                e["first_witness"] = witness()

    fl = flip(linsq)
    for t in range(trials):
        g = random_grid(rng, 3, 3)
        # the grid is indexed g[r][c]; in interchange terms d4 | d3 over d2 | d1
        d4, d3, d2, d1 = g[0][0], g[0][1], g[1][0], g[1][1]
        wit = lambda: {"trial": t, "grid": [d.to_json() for d in (d1, d2, d3, d4)]}
        record("interchange", check_interchange(linsq, d1, d2, d3, d4), wit)
        for row in g:
            for d in row:
                record("square-axiom", check_square_axiom(linsq, d), lambda: d.to_json())
        record("functoriality", check_functoriality(linsq, d1, d2)
               and check_functoriality(fl, d1, d3), wit)
        record("units", check_units(linsq, d1), wit)
        record("associativity", check_associativity(linsq, g[0][2], g[0][1], g[0][0]), wit)
        ff = flip(fl)
        record("flip-involution", all(
            getattr(ff, k) is getattr(linsq, k) for k in
            ("h", "v", "s_dh", "r_dh", "s_dv", "r_dv", "i_dh", "i_dv", "hcomp", "vcomp")), wit)
        sq = [d for row in g for d in row]
        record("flip-readings",
               same_reading(horizontalization(fl), verticalization(linsq), sq,
                            [d.top for d in sq], linsq.eq), wit)
    return [out[k] for k in laws]
