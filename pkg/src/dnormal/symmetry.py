"""Immersion squares, their regularity, the double normal bundles on both
sides, and the flip isomorphism between them together with every
intermediate identification used to build it."""

import random
from functools import cached_property

from .linalg import (Matrix, CompatibilityError, DimensionError, block_diag, hstack, image,
                     inverse, is_exact_at, is_injective, is_surjective, kernel,
                     left_inverse, quotient, random_sections, Subspace, to_q, vstack)
from .dvb import (DVBMap, FlipMap, compose, induced_iso, pullback_flip, quotient_dvb_map,
                  quotient_flip, quotient_v, restrict_carrier, side_pullback_h,
                  side_pullback_v)
from .flat import block_map, restrict, restrict_perm
from .normal import (Phi, TwoMap, Upsilon, double_tangent, is_vb_immersion,
                     normal_bundle, normal_differential, phi_identity_holds, tangent,
                     tangent_map, vb_normal)

NAMES = ("M1", "M2", "N1", "N2")


class SquareError(ValueError):
    pass


class NotRegular(SquareError):
    pass


class ImmersionSquare:
    """    i1: M1 -> M2 (top),    j1: M1 -> N1 (left),
           j2: M2 -> N2 (right),  i2: N1 -> N2 (bottom)."""

    def __init__(self, i1, i2, j1, j2, names=NAMES):
        self.i1, self.i2, self.j1, self.j2 = i1, i2, j1, j2
        self.names = tuple(names)
        m1, m2, n1, n2 = i1.cols, i1.rows, j1.rows, i2.rows
        if j1.cols != m1 or j2.shape != (n2, m2) or i2.shape != (n2, n1):
            raise DimensionError("edges do not fit a square")
        for label, f in (("i1", i1), ("i2", i2), ("j1", j1), ("j2", j2)):
            if not is_injective(f):
                raise SquareError("%s is not injective" % label)
        if i2 @ j1 != j2 @ i1:
            raise SquareError("square does not commute")

    @property
    def dims(self):
        return {"M1": self.i1.cols, "M2": self.i1.rows, "N1": self.j1.rows, "N2": self.i2.rows}

    def transpose(self):
        m1, m2, n1, n2 = self.names
        return ImmersionSquare(self.j1, self.j2, self.i1, self.i2, (m1, n1, m2, n2))

    def two_map_i(self):
        """The 2-map j1 => j2 with components i1, i2."""
        return TwoMap(self.i1, self.i2, self.j1, self.j2)

    def two_map_j(self):
        return TwoMap(self.j1, self.j2, self.i1, self.i2)

    def core_rank(self):
        return self.dims["N2"] - (image(self.i2) + image(self.j2)).rank

    def to_json(self):
        return {"spaces": self.dims,
                "maps": {k: getattr(self, k).to_json() for k in ("i1", "i2", "j1", "j2")}}

    def __eq__(self, other):
        return (isinstance(other, ImmersionSquare) and self.names == other.names
                and all(getattr(self, k) == getattr(other, k) for k in ("i1", "i2", "j1", "j2")))

    __hash__ = None

    def __repr__(self):
        d = self.dims
        return "ImmersionSquare(M1=%d, M2=%d, N1=%d, N2=%d)" % (d["M1"], d["M2"], d["N1"], d["N2"])


def identity_square(n):
    i = Matrix.identity(n)
    return ImmersionSquare(i, i, i, i)


def corner_square(j, i):
    """The square with top j, identity left edge, right edge i and bottom i o j."""
    if not (is_injective(j) and is_injective(i)):
        raise SquareError("corner square needs injective maps")
    sq = ImmersionSquare(j, i @ j, Matrix.identity(j.cols), i)
    ok, report = is_regular(sq)
    if not ok:
        raise SquareError("corner square is not regular: %s" % report)
    return sq


# regularity -------------------------------------------------------------------

def is_regular(sq):
    """Evaluate the three regularity criteria.  Criterion 3 decides; 1 and 2 must
    agree with it, otherwise a CompatibilityError is raised."""
    m1 = sq.i1.cols
    into = vstack(sq.j1, sq.i1)
    diff = hstack(sq.i2, -sq.j2)
    c3 = is_injective(into) and is_exact_at(into, diff)
    nu_i1, nu_i2 = normal_bundle(sq.i1), normal_bundle(sq.i2)
    nu_j1, nu_j2 = normal_bundle(sq.j1), normal_bundle(sq.j2)
    nd_j = normal_differential(sq.two_map_j(), nu_i1, nu_i2)
    nd_i = normal_differential(sq.two_map_i(), nu_j1, nu_j2)
    c1 = is_vb_immersion(nd_j, nu_i1, nu_i2)
    c2 = is_vb_immersion(nd_i, nu_j1, nu_j2)
    report = {
        "exactness": c3,
        "nu2_J_immersion": c1,
        "nu2_I_immersion": c2,
        "kernel_dim": kernel(diff).rank,
        "expected_kernel_dim": m1,
    }
    if not c1:
        report["nu2_J_failure"] = _fiber_failure(nd_j, nu_i1, nu_i2, "nu(i1)", "nu(i2)")
    if not c2:
        report["nu2_I_failure"] = _fiber_failure(nd_i, nu_j1, nu_j2, "nu(j1)", "nu(j2)")
    if not (c1 == c2 == c3):
        raise CompatibilityError("regularity criteria disagree: %s" % report)
    return c3, report


def _fiber_failure(f, e1, e2, s, t):
    fib = image(e1.p1)
    r = (f @ fib.incl()).rank()
    msg = "%s -> %s loses fiber rank: %d of %d survive (target rank %d)" % (
        s, t, r, e1.rank, e2.rank)
    if e1.rank > e2.rank:
        msg += "; dimension issue: source rank exceeds target rank"
    return msg


# the construction chain -----------------------------------------------------

class Chain:
    """All objects attached to one immersion square.  Objects named with J
    are the I-objects of the transposed square, so both chains share
    coordinates and the identifications between them are exact."""

    def __init__(self, sq, partner=None):
        self.sq = sq
        self.m1, self.m2, self.n1, self.n2 = sq.names
        self._partner = partner

    @property
    def t(self):
        if self._partner is None:
            self._partner = Chain(self.sq.transpose(), self)
        return self._partner

    # normal bundles and normal differentials
    @cached_property
    def nu_i1(self):
        return normal_bundle(self.sq.i1, self.m1, self.m2)

    @cached_property
    def nu_i2(self):
        return normal_bundle(self.sq.i2, self.n1, self.n2)

    @cached_property
    def nu_j1(self):
        return self.t.nu_i1

    @cached_property
    def nu_j2(self):
        return self.t.nu_i2

    @cached_property
    def nd_i(self):
        """nu^(2)(I): nu(j1) -> nu(j2) over i1."""
        return normal_differential(self.sq.two_map_i(), self.nu_j1, self.nu_j2)

    @cached_property
    def nd_j(self):
        """nu^(2)(J): nu(i1) -> nu(i2) over j1."""
        return self.t.nd_i

    @cached_property
    def dn_i(self):
        if not is_vb_immersion(self.nd_i, self.nu_j1, self.nu_j2):
            raise NotRegular("nu^(2)(I) is not a vb-immersion")
        return vb_normal(self.nd_i, self.nu_j1, self.nu_j2)

    @cached_property
    def dn_j(self):
        return self.t.dn_i

    # pulled back differentials
    @cached_property
    def pull_i(self):
        """I^* j2_*: i1^*TM2 -> i2^*TN2, (m1, w2) -> (j1 m1, j2 w2)."""
        e, f = self.nu_i1.pull, self.nu_i2.pull
        return restrict_carrier(e, f, block_diag(self.sq.j1, self.sq.j2, self.sq.j2))

    @cached_property
    def nu_pull_i(self):
        """nu(I^* j2_*) = X_I /_h Y_I."""
        return vb_normal(self.pull_i, self.nu_i1.pull, self.nu_i2.pull)

    @property
    def x_i(self):
        return self.nu_pull_i.pullback

    @property
    def y_i(self):
        return self.nu_pull_i.te

    @property
    def iota_i(self):
        return self.nu_pull_i.sharp

    @property
    def x_j(self):
        return self.t.x_i

    @cached_property
    def phi_i1(self):
        return Phi(self.sq.i1, self.m1, self.m2)

    @cached_property
    def phi_i2(self):
        return Phi(self.sq.i2, self.n1, self.n2)

    @property
    def y_j(self):
        """(i1_*)^{*,h} TTM2."""
        return self.phi_i1.flip.source

    @cached_property
    def iota_j(self):
        """Y_J -> X_J: restriction of j1_sharp x T(j2_sharp)."""
        sq, y, x = self.sq, self.y_j, self.x_j
        m2 = sq.i1.rows
        entries = {
            (self.m1, self.m1): Matrix.selection(range(sq.j1.cols), 2 * sq.j1.cols),
            (self.n1, self.m1): tangent_map(sq.j1),
            (self.m2, self.m2): Matrix.selection(range(2 * m2), 4 * m2),
            (self.n2, self.m2): block_diag(sq.j2, sq.j2, sq.j2, sq.j2),
        }
        amb = block_map(y.flat.blocks, x.flat.blocks, entries)
        return DVBMap(y, x, restrict(y.flat, x.flat, amb))

    # flips of the big spaces
    @cached_property
    def psi_j2(self):
        """X_I -> X_J: swap of the TM2 and TN1 factors, involution on TTN2."""
        return FlipMap(self.x_i, self.x_j, restrict_perm(self.x_i, self.x_j, kappa_on=(self.n2,)))

    @cached_property
    def pb_i(self):
        """(I^* j2_*)^{*,h}(i2_*)^{*,v} TTN2."""
        ttn2 = double_tangent(self.sq.i2.rows, self.n2)
        inner = side_pullback_v(tangent_map(self.sq.i2), tangent(self.sq.i2.cols, self.n1), ttn2)
        return side_pullback_h(self.pull_i, self.nu_i1.pull, inner)

    @cached_property
    def lem_pb(self):
        """(I^*j2_*)^{*,h}(i2_*)^{*,v}TTN2 -> (J^*i2_*)^{*,v}(j2_*)^{*,h}TTN2."""
        a = self.t.pbflip.source
        return DVBMap(self.pb_i, a, restrict_perm(self.pb_i, a))

    @cached_property
    def pbflip(self):
        """Pullback of Phi_{i2} along I^* j2_*: (I^*j2_*)^{*,v}(i2_*)^{*,h}TTN2 -> X_I."""
        return pullback_flip(self.pull_i, self.nu_i1.pull, self.phi_i2.flip)

    @cached_property
    def psi_i2(self):
        """X_J -> X_I assembled from the pullback flips of Phi_{j2}, Phi_{i2},
        the swap of lem_pb and the involution of TTN2."""
        b, p = self.pb_i, self.pbflip.source
        kap = FlipMap(b, p, restrict_perm(b, p, kappa_on=(self.n2,)))
        steps = [self.t.pbflip.inverse(), self.lem_pb.inverse(), kap, self.pbflip]
        out = steps[0]
        for s in steps[1:]:
            out = compose(s, out)
        if out.source.dim != self.x_j.dim or out.target.dim != self.x_i.dim:
            raise CompatibilityError("pullback flips do not connect X_J and X_I")
        return FlipMap(self.x_j, self.x_i, out.map)

    # lem2x2: nu(I^*j2_*) ~ nu^(2)(I)^{*,v} nu(j2_*)
    @cached_property
    def upsilon_i1(self):
        return Upsilon(self.sq.i1, self.m1, self.m2)

    @property
    def upsilon_j2(self):
        return self.t.upsilon_i2

    @cached_property
    def upsilon_i2(self):
        return Upsilon(self.sq.i2, self.n1, self.n2)

    @property
    def nu_star_j2(self):
        """nu(j2_*)."""
        return self.upsilon_j2.nu_star

    @cached_property
    def lem2x2(self):
        nu_star = self.nu_star_j2
        if nu_star.side_b.presentation.projection != self.nu_j2.q:
            raise CompatibilityError("side B of nu(j2_*) is not presented as nu(j2)")
        target = side_pullback_v(self.nd_i, self.nu_j1, nu_star)
        a = self.lem_pb.target
        to_b = restrict_perm(self.x_i, self.pb_i)
        amb = block_diag(self.nu_j1.q, nu_star.quot.map)
        to_t = restrict_carrier(a, target, amb)
        lift = to_t @ self.lem_pb.map @ to_b
        return DVBMap(self.nu_pull_i, target, induced_iso(self.nu_pull_i.quot.map, lift))

    # Theta
    @cached_property
    def quot_x_j(self):
        """X_J /_v Y_J."""
        return quotient_v(self.iota_j)

    @cached_property
    def iso_dom(self):
        """X_J /_v Y_J -> nu^(2)(I)^{*,h} T nu(j2), induced by q_{j1} x T(q_{j2})."""
        target = self.dn_i.pullback
        xj = self.x_j
        amb = block_diag(self.nu_j1.q, tangent_map(self.nu_j2.q))
        lift = restrict_carrier(xj, target, amb)
        q = self.quot_x_j
        return DVBMap(q, target, induced_iso(q.quot.map, lift))

    @cached_property
    def psi_over_phi(self):
        """Psi_{i2} / Phi_{i1}: X_J/_v Y_J -> X_I/_h Y_I."""
        phi = FlipMap(self.y_j, self.y_i, self.phi_i1.flip.map)
        return quotient_flip(self.psi_i2, phi, self.quot_x_j, self.nu_pull_i)

    @cached_property
    def theta_i(self):
        """nu^(2)(I)^{*,h} T nu(j2) -> nu(I^* j2_*)."""
        return compose(self.psi_over_phi, self.iso_dom.inverse())

    @property
    def theta_j(self):
        return self.t.theta_i

    # the 3x3 diagram
    @cached_property
    def nd_j_sharp_of_sharp(self):
        """nu^(2)(J_sharp): nu(i1_*) -> nu(J^* i2_*), induced by iota_J."""
        nu_i1_star = self.upsilon_i1.nu_star
        tgt = self.t.nu_pull_i
        sq = self.sq
        ttm1 = nu_i1_star.iota.source
        tj = tgt.iota.source
        amb = block_map(ttm1.flat.blocks, tj.flat.blocks, {
            (self.m1, self.m1): Matrix.selection(range(2 * sq.i1.cols), 4 * sq.i1.cols),
            (self.n1, self.m1): block_diag(sq.j1, sq.j1, sq.j1, sq.j1)})
        psi = DVBMap(ttm1, tj, restrict(ttm1.flat, tj.flat, amb))
        return quotient_dvb_map(self.iota_j, psi, nu_i1_star, tgt)

    @cached_property
    def right_column(self):
        """nu(J^* i2_*) /_v nu(i1_*)."""
        return quotient_v(self.nd_j_sharp_of_sharp)

    def p_i(self):
        """X_J -> nu(J^*i2_*) -> nu(J^*i2_*)/_v nu(i1_*)."""
        return self.right_column.quot.map @ self.t.nu_pull_i.quot.map

    def p_j(self):
        """X_J -> X_J/_v Y_J -> nu^(2)(I)^{*,h}T nu(j2) -> nu o nu^(2)(I)."""
        return self.dn_i.quot.map @ self.iso_dom.map @ self.quot_x_j.quot.map

    @cached_property
    def iso3x3(self):
        """nu o nu^(2)(I) -> nu(J^*i2_*) /_v nu(i1_*)."""
        return DVBMap(self.dn_i, self.right_column, induced_iso(self.p_j(), self.p_i()))

    @cached_property
    def theta_over_upsilon(self):
        """Theta_J / Upsilon^{i1}: nu o nu^(2)(J) -> nu(J^*i2_*) /_v nu(i1_*)."""
        ups_inv = self.upsilon_i1.flip.inverse()
        return quotient_flip(self.theta_j, ups_inv, self.dn_j, self.right_column)

    @cached_property
    def lam(self):
        """The flip isomorphism nu o nu^(2)(J) -> nu o nu^(2)(I)."""
        return compose(self.iso3x3.inverse(), self.theta_over_upsilon)


# lemma verification ---------------------------------------------------------

class LemmaResult:
    def __init__(self, name, ok, witness=None):
        self.name, self.ok, self.witness = name, bool(ok), witness

    def to_json(self):
        out = {"name": self.name, "pass": self.ok}
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def __repr__(self):
        return "%s: %s" % (self.name, "pass" if self.ok else "FAIL")


def _eq(name, a, b):
    if a == b:
        return LemmaResult(name, True)
    return LemmaResult(name, False, {"left": a.to_json(), "right": b.to_json()})


def _check_lem_pb(c):
    m = c.lem_pb
    return LemmaResult("lem-pb", m.map.rows == m.map.cols and is_injective(m.map))


def _check_psi(c):
    return _eq("psi-consistency", c.psi_i2.map @ c.psi_j2.map, Matrix.identity(c.x_i.dim))


def _check_lem2x2(c):
    m = c.lem2x2.map
    return LemmaResult("lem2x2", m.rows == m.cols and is_injective(m))


def _check_dvbmap0(c):
    """T(i1^*TM2) = (i1_*)^{*,v}TTM2 as the flat identity; under it (I^*j2_*)_*
    is the side-pullback of j2_** and lem_pb o iota_I is j1_sharp x (j2_*)_sharp."""
    sq = c.sq
    y_i, x_i = c.y_i, c.x_i
    vpb = side_pullback_v(tangent_map(sq.i1), tangent(sq.i1.cols, c.m1),
                          double_tangent(sq.i1.rows, c.m2))
    nat = restrict_perm(y_i, vpb)
    vpb2 = side_pullback_v(tangent_map(sq.i2), tangent(sq.i2.cols, c.n1),
                           double_tangent(sq.i2.rows, c.n2))
    nat2 = restrict_perm(c.nu_pull_i.tf, vpb2)
    amb = block_diag(tangent_map(sq.j1), block_diag(*[sq.j2] * 4))
    # first identity: the differential itself
    diff = block_diag(c.pull_i, c.pull_i)
    ok_a = nat2 @ diff == restrict_carrier(vpb, vpb2, amb) @ nat
    # second identity
    a = c.lem_pb.target
    e_amb = block_map(vpb.flat.blocks, a.flat.blocks, {
        (c.m1, c.m1): Matrix.selection(range(sq.j1.cols), 2 * sq.j1.cols),
        (c.n1, c.m1): tangent_map(sq.j1),
        (c.m2, c.m2): _side_a_of_tt(sq.i1.rows),
        (c.n2, c.m2): block_diag(*[sq.j2] * 4)})
    rhs = restrict(vpb.flat, a.flat, e_amb)
    comp = c.lem_pb.map @ restrict_perm(x_i, c.pb_i) @ c.iota_i.map @ inverse(nat)
    ok = ok_a and comp == rhs
    return LemmaResult("lem.dvbmap0", ok, None if ok else {"differential": ok_a})


def _side_a_of_tt(n):
    """TTM -> TM, (x, xdot, u, udot) -> (x, u)."""
    return Matrix.selection(list(range(n)) + list(range(2 * n, 3 * n)), 4 * n)


def _check_dvbmap(c):
    lhs = c.psi_j2.map @ c.iota_i.map
    rhs = c.iota_j.map @ inverse(c.phi_i1.flip.map)
    return _eq("lem.dvbmap", lhs, rhs)


def _check_phi(c):
    ok = all(phi_identity_holds(p) for p in (c.phi_i1, c.phi_i2, c.t.phi_i1, c.t.phi_i2))
    return LemmaResult("phi-sharp", ok)


def _check_flip3x2(c):
    """lem2x2 o Theta_I o (pullback of Upsilon_{j2} along nu^(2)(I)) = id."""
    pb = pullback_flip(c.nd_i, c.nu_j1, c.upsilon_j2.flip)
    if pb.target.dim != c.dn_i.pullback.dim:
        return LemmaResult("lem.flip3x2", False, {"reason": "pullback flip lands elsewhere"})
    loop = c.lem2x2.map @ c.theta_i.map @ pb.map
    ok = loop == Matrix.identity(loop.rows) and c.theta_i.is_bijective()
    return LemmaResult("lem.flip3x2", ok, None if ok else {"loop": loop.to_json()})


def _check_sq_flip(c):
    sharp = c.dn_j.sharp
    lhs = c.theta_j.map @ sharp.map
    rhs = c.nd_j_sharp_of_sharp.map @ inverse(c.upsilon_i1.flip.map)
    return _eq("lem.sq-flip", lhs, rhs)


def _check_3x3(c):
    m = c.t.iso3x3.map
    return LemmaResult("lem.3x3", m.rows == m.cols and is_injective(m))


def three_by_three(c):
    """The nine nodes and twelve maps of the exact diagram around X_I, as
    (rows, columns) with each entry (name, in_map, out_map, kind)."""
    sq, t = c.sq, c.t
    nu_j1_star = t.upsilon_i1.nu_star
    ttm1 = nu_j1_star.iota.source
    y_i = c.y_i
    amb = block_map(ttm1.flat.blocks, y_i.flat.blocks, {
        (c.m1, c.m1): Matrix.selection(range(2 * sq.i1.cols), 4 * sq.i1.cols),
        (c.m2, c.m1): block_diag(*[sq.i1] * 4)})
    t_i1_sharp = restrict(ttm1.flat, y_i.flat, amb)
    rows = [
        ("TTM1 -> (j1_*)^*TTN1 -> nu(j1_*)", nu_j1_star.sharp.map, nu_j1_star.quot.map, "h"),
        ("Y_I -> X_I -> nu(I^*j2_*)", c.iota_i.map, c.nu_pull_i.quot.map, "h"),
        ("T nu(i1) -> nu2(J)^*T nu(i2) -> nu o nu2(J)", c.dn_j.sharp.map, c.dn_j.quot.map, "h"),
    ]
    col2_out = t.iso_dom.map @ t.quot_x_j.quot.map
    t_q = tangent_map(c.nu_i1.q)
    cols = [
        ("TTM1 -> Y_I -> T nu(i1)", t_i1_sharp, t_q, "v"),
        ("Y_J' -> X_I -> nu2(J)^*T nu(i2)", t.iota_j.map, col2_out, "v"),
        ("nu(j1_*) -> nu(I^*j2_*) -> nu o nu2(J)", t.nd_j_sharp_of_sharp.map,
         inverse(t.iso3x3.map) @ t.right_column.quot.map, "v"),
    ]
    return rows, cols


def _exact_pair(i, q, d_mid, kind):
    act = d_mid.h if kind == "h" else d_mid.v
    fib = image(act.P(1))
    return (is_injective(i) and is_surjective(q)
            and kernel(q) == image(i).intersect(fib))


def _check_exactness(c):
    rows, cols = three_by_three(c)
    mids_r = [c.t.upsilon_i1.nu_star.pullback, c.x_i, c.dn_j.pullback]
    mids_c = [c.y_i, c.x_i, c.nu_pull_i]
    bad = []
    for (name, i, q, k), mid in zip(rows + cols, mids_r + mids_c):
        if not _exact_pair(i, q, mid, k):
            bad.append(name)
    # the four squares commute
    (_, r1i, r1q, _), (_, r2i, r2q, _), (_, r3i, r3q, _) = rows
    (_, c1i, c1q, _), (_, c2i, c2q, _), (_, c3i, c3q, _) = cols
    squares = {
        "top-left": r2i @ c1i == c2i @ r1i,
        "top-right": r2q @ c2i == c3i @ r1q,
        "bottom-left": c2q @ r2i == r3i @ c1q,
        "bottom-right": r3q @ c2q == c3q @ r2q,
    }
    bad += [k for k, v in squares.items() if not v]
    return LemmaResult("3x3-exactness", not bad, {"failures": bad} if bad else None)


LEMMAS = {
    "lem-pb": _check_lem_pb,
    "psi-consistency": _check_psi,
    "lem2x2": _check_lem2x2,
    "lem.dvbmap0": _check_dvbmap0,
    "lem.dvbmap": _check_dvbmap,
    "phi-sharp": _check_phi,
    "lem.flip3x2": _check_flip3x2,
    "lem.sq-flip": _check_sq_flip,
    "lem.3x3": _check_3x3,
    "3x3-exactness": _check_exactness,
}

REGULAR_ONLY = {"lem.flip3x2", "lem.sq-flip", "lem.3x3", "3x3-exactness"}


def verify_lemma(name, sq, chain=None):
    if name not in LEMMAS:
        raise KeyError("unknown lemma %r" % name)
    c = chain or Chain(sq)
    if name in REGULAR_ONLY and not is_regular(sq)[0]:
        raise NotRegular("%s needs a regular square" % name)
    try:
        return LEMMAS[name](c)
    except (CompatibilityError, DimensionError) as exc:
        return LemmaResult(name, False, {"error": str(exc)})


# public entry points ----------------------------------------------------------

def double_normal(sq, direction="J"):
    """nu o nu^(2)(J) for direction "J", nu o nu^(2)(I) for "I"."""
    if not is_regular(sq)[0]:
        raise NotRegular("double normal bundles need a regular square")
    c = Chain(sq)
    return c.dn_j if direction == "J" else c.dn_i


def psi_flip(sq):
    return Chain(sq).psi_j2


def theta_i(sq):
    if not is_regular(sq)[0]:
        raise NotRegular("Theta needs a regular square")
    return Chain(sq).theta_i


def theta_j(sq):
    if not is_regular(sq)[0]:
        raise NotRegular("Theta needs a regular square")
    return Chain(sq).theta_j


class SymmetryCertificate:
    def __init__(self, square):
        self.square = square
        self.regular = False
        self.criteria = {}
        self.dn_j = self.dn_i = None
        self.lam = None
        self.lemmas = []
        self.alt_agreement = False
        self.checks = {}
        self.dims = {}

    @property
    def passed(self):
        return (self.regular and self.lam is not None and self.alt_agreement
                and all(l.ok for l in self.lemmas) and all(self.checks.values()))

    def to_json(self):
        return {
            "regular": self.regular,
            "criteria": self.criteria,
            "dims": self.dims,
            "lambda": self.lam.map.to_json() if self.lam is not None else None,
            "lemmas": [l.to_json() for l in self.lemmas],
            "alt_agreement": self.alt_agreement,
            "checks": self.checks,
        }


def _flip_equivariant_at(f, samples=(0, 2, 3)):
    return f.flip_equivariant(samples)


def _side_matching(lam, src, tgt):
    a_to_b = image(lam.map @ src.a_incl) == image(tgt.b_incl)
    b_to_a = image(lam.map @ src.b_incl) == image(tgt.a_incl)
    return a_to_b and b_to_a


def lift_identity(c):
    """Lambda o P_J(sq) = P_J(sq') o Psi_{j2}: Lambda is induced by Psi."""
    return c.lam.map @ c.t.p_j() == c.p_j() @ c.psi_j2.map


def symmetry_iso(sq, lemmas=True):
    cert = SymmetryCertificate(sq)
    regular, report = is_regular(sq)
    cert.regular, cert.criteria = regular, report
    cert.dims = dict(sq.dims)
    if not regular:
        return cert
    c = Chain(sq)
    cert.dn_j, cert.dn_i = c.dn_j, c.dn_i
    lam = c.lam
    cert.lam = lam
    core = sq.core_rank()
    cert.dims.update({"dn_j": c.dn_j.dims(), "dn_i": c.dn_i.dims(), "core_formula": core})
    back = c.t.lam
    cert.alt_agreement = back.map @ lam.map == Matrix.identity(lam.map.rows)
    cert.checks = {
        "bijective": lam.is_bijective(),
        "flip_equivariant": _flip_equivariant_at(lam),
        "side_matching": _side_matching(lam, c.dn_j, c.dn_i),
        "core_rank": c.dn_j.dims()["core"] == core == c.dn_i.dims()["core"],
        "lift_identity": lift_identity(c),
    }
    if lemmas:
        cert.lemmas = [verify_lemma(name, sq, c) for name in LEMMAS]
    return cert


def section_probe(sq, seed):
    """Rebuild the chain with randomized quotient sections and report whether
    the resulting flip is still induced by Psi (the lift identity)."""
    with random_sections(seed):
        c = Chain(sq)
        return lift_identity(c) and c.lam.is_bijective()


# generators -------------------------------------------------------------------

def _random_matrix(rng, rows, cols, lo=-3, hi=3):
    return Matrix([[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)], cols)


def random_injective(rng, rows, cols, tries=100):
    if cols > rows:
        raise DimensionError("no injective map Q^%d -> Q^%d" % (cols, rows))
    for _ in range(tries):
        m = _random_matrix(rng, rows, cols)
        if is_injective(m):
            return m
    raise SquareError("could not sample an injective map")


def random_invertible(rng, n):
    return random_injective(rng, n, n)


def _check_bounds(d):
    m1, m2, n1, n2 = d
    if min(d) < 0:
        raise SquareError("negative dimension")
    if m1 > min(m2, n1) or m2 > n2 or n1 > n2:
        raise SquareError("infeasible dimensions %s" % (d,))
    if n1 + m2 - m1 > n2:
        raise SquareError("infeasible dimensions %s: no regular square fits" % (d,))


def random_regular_square(seed, dims=(1, 2, 2, 4), retries=50):
    """Pushout of random injections, embedded in N2 and twisted by a random
    change of basis.  Deterministic per seed."""
    _check_bounds(dims)
    rng = random.Random(seed)
    m1, m2, n1, n2 = dims
    for _ in range(retries):
        i1 = random_injective(rng, m2, m1)
        j1 = random_injective(rng, n1, m1)
        p = n1 + m2 - m1
        # pushout: (N1 + M2) / {(j1 m, -i1 m)}
        rel = vstack(j1, -i1)
        qp = quotient(n1 + m2, Subspace.span(rel) if m1 else Subspace.zero(n1 + m2))
        i2p = qp.projection @ vstack(Matrix.identity(n1), Matrix.zeros(m2, n1))
        j2p = qp.projection @ vstack(Matrix.zeros(n1, m2), Matrix.identity(m2))
        e = random_injective(rng, n2, p) if p else Matrix.zeros(n2, 0)
        g = random_invertible(rng, n2)
        i2, j2 = g @ e @ i2p, g @ e @ j2p
        try:
            sq = ImmersionSquare(i1, i2, j1, j2)
        except SquareError:
            continue
        if is_regular(sq)[0]:
            return sq
    raise SquareError("retry cap exceeded")


def random_square(seed, dims=(1, 2, 2, 4), retries=200):
    """A commuting square of injections with no regularity guarantee."""
    rng = random.Random(seed)
    m1, m2, n1, n2 = dims
    if m1 > min(m2, n1) or max(m2, n1) > n2:
        raise SquareError("infeasible dimensions %s" % (dims,))
    for _ in range(retries):
        i1 = random_injective(rng, m2, m1)
        j1 = random_injective(rng, n1, m1)
        i2 = random_injective(rng, n2, n1)
        # j2 is forced on i1(M1) and free on a complement
        if m1:
            li = left_inverse(i1)
            j2 = i2 @ j1 @ li + _random_matrix(rng, n2, m2) @ (Matrix.identity(m2) - i1 @ li)
        else:
            j2 = _random_matrix(rng, n2, m2)
        if is_injective(j2):
            return ImmersionSquare(i1, i2, j1, j2)
    raise SquareError("retry cap exceeded")


def random_dims(rng, top=4):
    n2 = rng.randint(1, top)
    n1 = rng.randint(0, n2)
    m2 = rng.randint(0, n2)
    m1 = rng.randint(0, min(n1, m2))
    return m1, m2, n1, n2


def counterexample_square():
    """First-coordinate inclusions Q -> Q^3, Q -> Q^5, Q^3 -> Q^6, Q^5 -> Q^6."""
    def first(n, m):
        return Matrix.selection(range(m), n).T
    return ImmersionSquare(first(3, 1), first(6, 5), first(5, 1), first(6, 3))


def square_from_json(doc):
    try:
        spaces, maps = doc["spaces"], doc["maps"]
        dims = [int(spaces[k]) for k in NAMES]
        shapes = {"i1": (dims[1], dims[0]), "j1": (dims[2], dims[0]),
                  "j2": (dims[3], dims[1]), "i2": (dims[3], dims[2])}
        ms = {}
        for k, (r, cl) in shapes.items():
            rows = maps[k]
            if not isinstance(rows, list) or len(rows) != r:
                raise DimensionError("maps.%s should have %d rows" % (k, r))
            vals = []
            for a, row in enumerate(rows):
                if not isinstance(row, list) or len(row) != cl:
                    raise DimensionError("maps.%s[%d] should have %d entries" % (k, a, cl))
                vals.append([])
                for b, x in enumerate(row):
                    try:
                        vals[-1].append(to_q(x))
                    except (TypeError, ValueError) as exc:
                        raise SquareError("maps.%s[%d][%d]: %s" % (k, a, b, exc)) from None
            ms[k] = Matrix(vals, cl)
    except KeyError as exc:
        raise SquareError("missing field %s" % exc) from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (SquareError, DimensionError)):
            raise
        raise SquareError("malformed square: %s" % exc) from None
    return ImmersionSquare(ms["i1"], ms["i2"], ms["j1"], ms["j2"])
