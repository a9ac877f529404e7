"""Double vector spaces: one total space with two commuting weight-{0,1}
actions.  Side A is the fixed locus of the horizontal action, side B the fixed
locus of the vertical one.  Side A is a bundle over the base through the
vertical action, side B through the horizontal one."""

import copy
import random

from .linalg import (Matrix, Subspace, CompatibilityError, DimensionError, block_diag,
                     fiber_product, hstack, image, induced_map, inverse, is_injective, kernel,
                     left_inverse, quotient, vstack)
from .homogeneity import (ScalingAction, VBSpace, ActionError, evaluate, is_equivariant,
                          product_action, product_bundle, pullback_action, quotient_action,
                          trivial_bundle)


class DVSError(ValueError):
    pass


def _commute(h, v):
    for k in (0, 1):
        for l in (0, 1):
            if h.P(k) @ v.P(l) != v.P(l) @ h.P(k):
                return False
    return True


def _restricted_side(act, sub, base_incl):
    incl, coords = sub.incl(), sub.coords()
    a = act.restrict(incl, coords)
    return VBSpace(a, coords @ base_incl), incl


class DVS:
    def __init__(self, h, v, side_a=None, a_incl=None, side_b=None, b_incl=None,
                 flat=None, name=None, check=True):
        if h.dim != v.dim:
            raise DimensionError("actions act on different spaces")
        if set(h.projections) - {0, 1} or set(v.projections) - {0, 1}:
            raise DVSError("double vector space actions have weights in {0, 1}")
        if check and not _commute(h, v):
            raise DVSError("horizontal and vertical actions do not commute")
        self.h = h
        self.v = v
        self.dim = h.dim
        self.flat = flat
        self.name = name
        if side_a is not None:
            base_incl = a_incl @ side_a.zero_section
        elif side_b is not None:
            base_incl = b_incl @ side_b.zero_section
        else:
            base_incl = image(h.P(0) @ v.P(0)).incl()
        if side_a is None:
            side_a, a_incl = _restricted_side(v, image(h.P(0)), base_incl)
        if side_b is None:
            side_b, b_incl = _restricted_side(h, image(v.P(0)), base_incl)
        self.side_a, self.a_incl = side_a, a_incl
        self.side_b, self.b_incl = side_b, b_incl
        self.base_incl = base_incl
        if check:
            self._check_sides()

    def _check_sides(self):
        h0, v0 = self.h.P(0), self.v.P(0)
        for label, side, incl, own, other in (("A", self.side_a, self.a_incl, h0, self.v),
                                              ("B", self.side_b, self.b_incl, v0, self.h)):
            if incl.shape != (self.dim, side.dim) or not is_injective(incl):
                raise DVSError("side %s inclusion is not injective" % label)
            if image(incl) != image(own):
                raise DVSError("side %s inclusion misses the fixed locus" % label)
            if not is_equivariant(incl, side.action, other):
                raise DVSError("side %s is not a sub-bundle" % label)
        if self.a_incl @ self.side_a.zero_section != self.b_incl @ self.side_b.zero_section:
            raise DVSError("sides disagree on the base")

    @property
    def base_dim(self):
        return self.base_incl.cols

    @property
    def core(self):
        return image(self.h.P(1) @ self.v.P(1))

    def four_projections(self):
        h0, h1, v0, v1 = self.h.P(0), self.h.P(1), self.v.P(0), self.v.P(1)
        return {"base": h0 @ v0, "a_fiber": h0 @ v1, "b_fiber": h1 @ v0, "core": h1 @ v1}

    def dims(self):
        p = self.four_projections()
        return {"total": self.dim, "base": p["base"].rank(), "side_a_rank": p["a_fiber"].rank(),
                "side_b_rank": p["b_fiber"].rank(), "core": p["core"].rank()}

    def pi_a(self):
        """Projection onto side A coordinates along the horizontal action."""
        return left_inverse(self.a_incl) @ self.h.P(0)

    def pi_b(self):
        return left_inverse(self.b_incl) @ self.v.P(0)

    def same_structure(self, other):
        return (self.dim == other.dim and self.h == other.h and self.v == other.v)

    def __repr__(self):
        d = self.dims()
        return "DVS(%s: total %d, base %d, sides %d/%d, core %d)" % (
            self.name or "", d["total"], d["base"], d["side_a_rank"], d["side_b_rank"], d["core"])

    def to_json(self):
        return {"dim": self.dim, "hProjections": self.h.to_json()["projections"],
                "vProjections": self.v.to_json()["projections"]}


def orthogonal_family_ok(d):
    ps = list(d.four_projections().values())
    n = d.dim
    total = Matrix.zeros(n, n)
    for i, p in enumerate(ps):
        if p @ p != p:
            return False
        for q in ps[i + 1:]:
            if not (p @ q).is_zero():
                return False
        total = total + p
    return total == Matrix.identity(n)


class DVBMap:
    """A linear map equivariant for both actions."""

    def __init__(self, source, target, map, check=True):
        if map.shape != (target.dim, source.dim):
            raise DimensionError("map shape %s does not fit %d -> %d" % (map.shape, source.dim, target.dim))
        self.source = source
        self.target = target
        self.map = map
        if check:
            if not is_equivariant(map, source.h, target.h):
                raise DVSError("map is not equivariant for the horizontal actions")
            if not is_equivariant(map, source.v, target.v):
                raise DVSError("map is not equivariant for the vertical actions")

    def side_a_map(self):
        return left_inverse(self.target.a_incl) @ self.map @ self.source.a_incl

    def side_b_map(self):
        return left_inverse(self.target.b_incl) @ self.map @ self.source.b_incl

    def base_map(self):
        return left_inverse(self.target.base_incl) @ self.map @ self.source.base_incl

    def is_bijective(self):
        return self.source.dim == self.target.dim and is_injective(self.map)

    def inverse(self):
        return DVBMap(self.target, self.source, inverse(self.map))

    def __matmul__(self, other):
        return compose(self, other)


class FlipMap:
    """A linear map intertwining the horizontal action of its source with the
    vertical action of its target, and the vertical with the horizontal."""

    def __init__(self, source, target, map, kind="total", check=True):
        if map.shape != (target.dim, source.dim):
            raise DimensionError("map shape %s does not fit %d -> %d" % (map.shape, source.dim, target.dim))
        self.source = source
        self.target = target
        self.map = map
        self.kind = kind
        if check and not self.flip_equivariant():
            raise DVSError("map does not exchange the two actions")

    def flip_equivariant(self, samples=None):
        if samples is None:
            return (is_equivariant(self.map, self.source.h, self.target.v)
                    and is_equivariant(self.map, self.source.v, self.target.h))
        for s in samples:
            m = self.map
            if m @ evaluate(self.source.h, s) != evaluate(self.target.v, s) @ m:
                return False
            if m @ evaluate(self.source.v, s) != evaluate(self.target.h, s) @ m:
                return False
        return True

    def is_bijective(self):
        return self.source.dim == self.target.dim and is_injective(self.map)

    def inverse(self):
        return FlipMap(self.target, self.source, inverse(self.map), self.kind)

    def __matmul__(self, other):
        return compose(self, other)


def compose(g, f):
    """g after f; flips compose with dvb-maps to flips and with flips to dvb-maps."""
    if f.target.dim != g.source.dim:
        raise DimensionError("maps are not composable")
    m = g.map @ f.map
    flips = isinstance(f, FlipMap) + isinstance(g, FlipMap)
    if flips == 1:
        kind = g.kind if isinstance(g, FlipMap) else f.kind
        return FlipMap(f.source, g.target, m, kind)
    return DVBMap(f.source, g.target, m)


def flip_total(d):
    out = copy.copy(d)
    out.h, out.v = d.v, d.h
    out.side_a, out.side_b = d.side_b, d.side_a
    out.a_incl, out.b_incl = d.b_incl, d.a_incl
    if getattr(d, "quot", None) is not None:
        out.quot = DVBMap(flip_total(d.quot.source), out, d.quot.map, check=False)
        out.iota = DVBMap(flip_total(d.iota.source), flip_total(d.iota.target), d.iota.map,
                          check=False)
    return out


def flip_of_map(m):
    return DVBMap(flip_total(m.source), flip_total(m.target), m.map)


def identity_flip(d):
    """The identity reinterpreted as a flip map d -> flip(d)."""
    return FlipMap(d, flip_total(d), Matrix.identity(d.dim), kind="identity")


# lifts ------------------------------------------------------------------

def h_lift(e):
    """E with trivial horizontal action and its bundle action vertically."""
    return DVS(ScalingAction.trivial(e.dim), e.action, side_a=e, a_incl=Matrix.identity(e.dim),
               side_b=trivial_bundle(e.base_dim), b_incl=e.zero_section, flat=e.flat)


def v_lift(e):
    return flip_total(h_lift(e))


def lift_map(phi, e, f, orientation="h"):
    lift = h_lift if orientation == "h" else v_lift
    return DVBMap(lift(e), lift(f), phi)


def canonical_surmersions(d):
    ph = DVBMap(d, h_lift(d.side_a), d.pi_a())
    pv = DVBMap(d, v_lift(d.side_b), d.pi_b())
    return ph, pv


# carriers ----------------------------------------------------------------

def restrict_carrier(x, y, a):
    """Restriction of an ambient map a to the carriers of x and y."""
    img = a @ x.carrier.incl()
    if not y.carrier.contains(img):
        raise CompatibilityError("ambient map does not carry the source carrier into the target")
    return y.carrier.coords() @ img


def _attach_carrier(obj, carrier, factors):
    obj.carrier = carrier
    obj.factors = factors
    return obj


def fiber_product_dvb(m1, m2):
    """Fiber product of a cospan of dvb-maps D1 -> D <- D2."""
    if m1.target.dim != m2.target.dim:
        raise DimensionError("cospan targets differ")
    carrier, _, _ = fiber_product(m1.map, m2.map)
    d1, d2 = m1.source, m2.source
    incl, coords = carrier.incl(), carrier.coords()
    h = product_action(d1.h, d2.h).restrict(incl, coords)
    v = product_action(d1.v, d2.v).restrict(incl, coords)
    flat = None
    if d1.flat is not None and d2.flat is not None:
        pf = d1.flat.product(d2.flat)
        flat = pf.restrict_to(incl) if pf is not None else None
    out = DVS(h, v, flat=flat)
    return _attach_carrier(out, carrier, (d1, d2))


# side-pullbacks ------------------------------------------------------------

def side_pullback_h(phi, e, d):
    """Horizontal side-pullback of d along a vb-map phi: e -> side A of d.
    Carried by pairs (x, y) in e + d with phi(x) equal to the side-A part of y."""
    a = d.side_a
    if phi.shape != (a.dim, e.dim):
        raise DimensionError("map does not land in side A")
    if not is_equivariant(phi, e.action, a.action):
        raise ActionError("map is not a vb-map into side A")
    f = d.a_incl @ phi
    carrier, _, _ = fiber_product(f, d.h.P(0))
    incl, coords = carrier.incl(), carrier.coords()
    h = product_action(ScalingAction.trivial(e.dim), d.h).restrict(incl, coords)
    v = product_action(e.action, d.v).restrict(incl, coords)
    a_incl = coords @ vstack(Matrix.identity(e.dim), f)
    fb = e.base_map(phi, a)
    side_b = pullback_action(fb, d.side_b)
    sb = side_b.carrier.incl()
    me = e.base_dim
    b_amb = vstack(e.zero_section @ sb.submatrix(rows=range(me)),
                   d.b_incl @ sb.submatrix(rows=range(me, sb.rows)))
    if not carrier.contains(b_amb):
        raise CompatibilityError("pulled back side B does not sit in the carrier")
    b_incl = coords @ b_amb
    flat = None
    if e.flat is not None and d.flat is not None:
        pf = e.flat.product(d.flat)
        flat = pf.restrict_to(incl) if pf is not None else None
    out = DVS(h, v, side_a=e, a_incl=a_incl, side_b=side_b, b_incl=b_incl, flat=flat)
    out.pullback_map = phi
    return _attach_carrier(out, carrier, (e, d))


def side_pullback_v(psi, e, d):
    """Vertical side-pullback of d along a vb-map psi: e -> side B of d."""
    return flip_total(side_pullback_h(psi, e, flip_total(d)))


def side_pullback_map_h(gamma, p1, p2, phi):
    """Side-pullback of a dvb-map phi: D1 -> D2 between p1 = psi1^{*,h} D1 and
    p2 = psi2^{*,h} D2, given the vb-map gamma between the pulled-back bundles."""
    m = restrict_carrier(p1, p2, block_diag(gamma, phi.map))
    return DVBMap(p1, p2, m)


side_pullback_map_v = side_pullback_map_h


def sharpen_h(phi):
    """Horizontal sharpening: y -> (side-A part of y, phi(y)), a dvb-map over
    the identity of side A into the side-pullback of the target."""
    d1, d2 = phi.source, phi.target
    alpha = phi.side_a_map()
    p = side_pullback_h(alpha, d1.side_a, d2)
    amb = vstack(d1.pi_a(), phi.map)
    return DVBMap(d1, p, restrict_ambient(p, amb))


def sharpen_v(phi):
    d1, d2 = phi.source, phi.target
    beta = phi.side_b_map()
    p = side_pullback_v(beta, d1.side_b, d2)
    amb = vstack(d1.pi_b(), phi.map)
    return DVBMap(d1, p, restrict_ambient(p, amb))


def restrict_ambient(y, amb):
    """Corestriction of a map into the ambient of y's carrier."""
    if not y.carrier.contains(amb):
        raise CompatibilityError("map does not land in the carrier")
    return y.carrier.coords() @ amb


def pullback_unit(d):
    """The canonical isomorphism d -> id^{*,h} d."""
    p = side_pullback_h(Matrix.identity(d.side_a.dim), d.side_a, d)
    return DVBMap(d, p, restrict_ambient(p, vstack(d.pi_a(), Matrix.identity(d.dim))))


# vb-objects ----------------------------------------------------------------

class VBObject:
    """A bundle (carrier, with its action kappa) carrying an extra commuting
    action tau whose fixed locus is the embedded bundle j(E)."""

    def __init__(self, carrier, embedded, j, tau, orientation="horizontal"):
        self.carrier = carrier
        self.embedded = embedded
        self.j = j
        self.tau = tau
        self.orientation = orientation

    def violations(self):
        out = []
        kap = self.carrier.action
        if set(self.tau.projections) - {0, 1}:
            out.append("i")
        if not (is_injective(self.j) and is_equivariant(self.j, self.embedded.action, kap)):
            out.append("ii")
        if not _commute(self.tau, kap):
            out.append("iii")
        if image(self.tau.P(0)) != image(self.j):
            out.append("iv")
        if self.tau.P(0) @ self.j != self.j:
            out.append("v")
        return out


def vb_object_from_dvs(d, orientation="horizontal"):
    if orientation == "horizontal":
        return VBObject(VBSpace(d.v, d.b_incl), d.side_a, d.a_incl, d.h, orientation)
    return VBObject(VBSpace(d.h, d.a_incl), d.side_b, d.b_incl, d.v, orientation)


def dvs_from_vb_object(o):
    bad = o.violations()
    if bad:
        raise DVSError("vb-object conditions fail: %s" % ", ".join(bad))
    if o.orientation == "horizontal":
        return DVS(o.tau, o.carrier.action, side_a=o.embedded, a_incl=o.j)
    return DVS(o.carrier.action, o.tau, side_b=o.embedded, b_incl=o.j)


# quotients ------------------------------------------------------------------

def quotient_h(iota):
    """Horizontal quotient D /_h Q along a dvb-embedding iota: Q -> D that is the
    identity on side A.  Only the horizontal-fiber part of iota(Q) is divided out."""
    q, d = iota.source, iota.target
    if not is_injective(iota.map):
        raise DVSError("embedding is not injective")
    if q.side_a.dim != d.side_a.dim or iota.map @ q.a_incl != d.a_incl:
        raise DVSError("embedding is not the identity on side A")
    sub = image(iota.map).intersect(image(d.h.P(1)))
    qp = quotient(d.dim, sub)
    proj, sec = qp.projection, qp.section
    h = ScalingAction(qp.dim, {k: proj @ p @ sec for k, p in d.h.projections.items()}, check=False)
    v = ScalingAction(qp.dim, {k: proj @ p @ sec for k, p in d.v.projections.items()}, check=False)
    side_b = quotient_action(d.side_b, kernel(proj @ d.b_incl))
    b_incl = proj @ d.b_incl @ side_b.presentation.section
    out = DVS(h, v, side_a=d.side_a, a_incl=proj @ d.a_incl, side_b=side_b, b_incl=b_incl)
    out.presentation = qp
    out.parent = d
    out.iota = iota
    out.kind = "h"
    out.quot = DVBMap(d, out, proj)
    return out


def quotient_v(iota):
    fq = quotient_h(flip_of_map(iota))
    out = flip_total(fq)
    out.kind = "v"
    out.iota = iota
    out.quot = DVBMap(iota.target, out, fq.quot.map)
    return out


def quotient_dvb_map(phi, psi, q1, q2):
    """Induced dvb-map q1 -> q2 of a 2-dvb-map (phi, psi) between embeddings."""
    if phi.map @ q1.iota.map != q2.iota.map @ psi.map:
        raise CompatibilityError("the square of embeddings does not commute")
    r = induced_map(q1.quot.map, q2.quot.map @ phi.map)
    if r is None:
        raise CompatibilityError("map does not descend to the quotients")
    return DVBMap(q1, q2, r)


def quotient_flip(flip_d, flip_q, q1, q2):
    """Induced flip map q1 -> q2 of a commuting square of flip maps."""
    if flip_d.map @ q1.iota.map != q2.iota.map @ flip_q.map:
        raise CompatibilityError("the square of flips does not commute")
    r = induced_map(q1.quot.map, q2.quot.map @ flip_d.map)
    if r is None:
        raise CompatibilityError("flip does not descend to the quotients")
    return FlipMap(q1, q2, r, kind="quotient")


def pullback_flip(psi, e, ups):
    """Pullback of a flip map ups: D1 -> D2 along psi: e -> side B of D1, as the
    restriction of id x ups from psi^{*,v} D1 to (ups psi)^{*,h} D2."""
    d1, d2 = ups.source, ups.target
    p1 = side_pullback_v(psi, e, d1)
    psi2 = left_inverse(d2.a_incl) @ ups.map @ d1.b_incl @ psi
    p2 = side_pullback_h(psi2, e, d2)
    m = restrict_carrier(p1, p2, block_diag(Matrix.identity(e.dim), ups.map))
    return FlipMap(p1, p2, m, kind="pullback")


def induced_iso(p1, p2):
    """The map R with R p1 = p2 for surjective p1; raises unless it exists and
    is bijective."""
    r = induced_map(p1, p2)
    if r is None:
        raise CompatibilityError("map does not descend along the surjection")
    if r.rows != r.cols or not is_injective(r):
        raise CompatibilityError("descended map is not bijective")
    return r


# sub-objects and samplers ----------------------------------------------------

def sub_dvs(d, sub, keep="a"):
    """The sub-DVS carried by an invariant subspace containing one full side;
    returns (P, embedding P -> d).  The kept side keeps d's coordinates so the
    embedding is the identity there."""
    incl, coords = sub.incl(), sub.coords()
    h, v = d.h.restrict(incl, coords), d.v.restrict(incl, coords)
    if keep == "a":
        if not sub.contains(d.a_incl):
            raise DVSError("subspace does not contain side A")
        p = DVS(h, v, side_a=d.side_a, a_incl=coords @ d.a_incl)
    else:
        if not sub.contains(d.b_incl):
            raise DVSError("subspace does not contain side B")
        p = DVS(h, v, side_b=d.side_b, b_incl=coords @ d.b_incl)
    return p, DVBMap(p, d, incl)


def _rand(rng, rows, cols, lo=-2, hi=2):
    return Matrix([[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)], cols)


def _rand_invertible(rng, n):
    while True:
        g = _rand(rng, n, n)
        if is_injective(g):
            return g


def random_dvs(rng, base, a_rank, b_rank, core, twist=True):
    """A DVS with the given base, side ranks and core, in coordinates twisted by a
    random change of basis."""
    h = ScalingAction.graded([0] * base + [0] * a_rank + [1] * b_rank + [1] * core)
    v = ScalingAction.graded([0] * base + [1] * a_rank + [0] * b_rank + [1] * core)
    n = h.dim
    if twist and n:
        g = _rand_invertible(rng, n)
        gi = inverse(g)
        h, v = h.conjugate(g, gi), v.conjugate(g, gi)
    return DVS(h, v)


def random_invariant_subspace(rng, d, keep="a"):
    """Random subspace invariant under both actions that contains the kept side."""
    parts = d.four_projections()
    cols = [d.a_incl if keep == "a" else d.b_incl]
    for name in ("a_fiber", "b_fiber", "core"):
        p = parts[name]
        k = rng.randint(0, p.rank())
        if k:
            cols.append(p @ _rand(rng, d.dim, k))
    return Subspace.span(hstack(*cols))


# compatibilities -------------------------------------------------------------

def quotient_pullback_iso(iota, phi, psi, k, u, v):
    """For a horizontal quotient D /_h Q along iota and a 2-map (phi, psi) from a
    wide sub-bundle k: V -> U to side B of iota, build the isomorphism
    (phi^{*,v} D) /_h (psi^{*,v} Q) -> (phi/psi)^{*,v} (D /_h Q) induced by the
    two quotient projections.  Returns (iso, left, right)."""
    q, d = iota.source, iota.target
    iota_b = left_inverse(d.b_incl) @ iota.map @ q.b_incl
    if iota_b @ psi != phi @ k:
        raise CompatibilityError("the 2-map does not commute with the side embedding")
    pd = side_pullback_v(phi, u, d)
    pq = side_pullback_v(psi, v, q)
    up = DVBMap(pq, pd, restrict_carrier(pq, pd, block_diag(k, iota.map)))
    right = quotient_h(up)
    dq = quotient_h(iota)
    uv = quotient_action(u, image(k).intersect(u.fiber))
    phi_q = induced_map(uv.presentation.projection,
                        left_inverse(dq.b_incl) @ dq.quot.map @ d.b_incl @ phi)
    if phi_q is None:
        raise CompatibilityError("phi does not descend to the quotient bundles")
    left = side_pullback_v(phi_q, uv, dq)
    legs = restrict_carrier(pd, left, block_diag(uv.presentation.projection, dq.quot.map))
    iso = DVBMap(right, left, induced_iso(right.quot.map, legs))
    return iso, left, right


def mixed_quotient_flip(iota1, iota2, phi, psi):
    """Both sides of (phi /_h psi) o (flip_D / flip_P) = (phi o flip_D) / (psi o flip_P)
    for an embedding iota1 in the vertical direction, one iota2 in the horizontal
    direction and a 2-dvb-map (phi, psi): flip(iota1) => iota2."""
    fi = flip_of_map(iota1)
    qv1 = quotient_v(iota1)
    qh1 = quotient_h(fi)
    qh2 = quotient_h(iota2)
    flip_d = FlipMap(iota1.target, fi.target, Matrix.identity(iota1.target.dim))
    flip_p = FlipMap(iota1.source, fi.source, Matrix.identity(iota1.source.dim))
    lhs = compose(quotient_dvb_map(phi, psi, qh1, qh2), quotient_flip(flip_d, flip_p, qv1, qh1))
    rhs = quotient_flip(compose(phi, flip_d), compose(psi, flip_p), qv1, qh2)
    return lhs, rhs


def random_dvb_map(rng, src, tgt):
    """A random map sending each of the four parts of src into the same part of tgt."""
    ps, pt = src.four_projections(), tgt.four_projections()
    m = Matrix.zeros(tgt.dim, src.dim)
    for k in ps:
        m = m + pt[k] @ _rand(rng, tgt.dim, src.dim) @ ps[k]
    return DVBMap(src, tgt, m)


def _rand_injective(rng, rows, cols):
    while True:
        m = _rand(rng, rows, cols)
        if is_injective(m):
            return m


def _fiber_basis(e):
    return image(e.p1).incl()


def random_quotient_pullback_instance(seed, top=2):
    """Arguments for quotient_pullback_iso: (iota, phi, psi, k, u, v)."""
    rng = random.Random(seed)
    d = random_dvs(rng, *[rng.randint(0, top) for _ in range(4)])
    q, iota = sub_dvs(d, random_invariant_subspace(rng, d, "a"), "a")
    m, m2 = d.base_dim, rng.randint(0, top)
    ru = rng.randint(0, top)
    rv = rng.randint(0, ru)
    u, v = product_bundle(m2, ru), product_bundle(m2, rv)
    kk = _rand_injective(rng, ru, rv)
    k = block_diag(Matrix.identity(m2), kk)
    f = _rand(rng, m, m2)
    sd, sq = d.side_b, q.side_b
    fd, fq = _fiber_basis(sd), _fiber_basis(sq)
    iota_b = left_inverse(d.b_incl) @ iota.map @ q.b_incl
    w = left_inverse(fd) @ iota_b @ fq
    b = _rand(rng, fq.cols, rv)
    kl = left_inverse(kk)
    a = w @ b @ kl + _rand(rng, fd.cols, ru) @ (Matrix.identity(ru) - kk @ kl)
    phi = hstack(sd.zero_section @ f, fd @ a)
    psi = hstack(sq.zero_section @ f, fq @ b)
    return iota, phi, psi, k, u, v


def random_mixed_flip_instance(seed, top=2):
    """Arguments for mixed_quotient_flip: (iota1, iota2, phi, psi)."""
    rng = random.Random(seed)
    d1 = random_dvs(rng, *[rng.randint(0, top) for _ in range(4)])
    p1, iota1 = sub_dvs(d1, random_invariant_subspace(rng, d1, "b"), "b")
    fd1 = flip_total(d1)
    d2 = random_dvs(rng, fd1.base_dim, *[rng.randint(0, top) for _ in range(3)])
    phi = random_dvb_map(rng, fd1, d2)
    img = image(phi.map @ iota1.map) + random_invariant_subspace(rng, d2, "a")
    p2, iota2 = sub_dvs(d2, img, "a")
    psi = DVBMap(flip_total(p1), p2, img.coords() @ phi.map @ iota1.map)
    return iota1, iota2, phi, psi
