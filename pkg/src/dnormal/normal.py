"""Tangent functor, sharp differentials, normal bundles and normal
differentials in the linear model, the vb-normal bundle, the flip maps
Phi and Upsilon, and both functoriality statements for the normal
differential."""

import random

from .linalg import (Matrix, CompatibilityError, block_diag, fiber_product, image,
                     induced_quotient_map, is_injective, left_inverse, quotient, solve, vstack)
from .homogeneity import (ScalingAction, VBSpace, fiber_part, is_equivariant, product_action,
                          product_bundle, pullback_action, quotient_action)
from .dvb import (DVS, DVBMap, FlipMap, compose, induced_iso, quotient_dvb_map, quotient_flip,
                  quotient_h, quotient_v, restrict_carrier, restrict_ambient, sharpen_h)
from .flat import Flat, restrict_perm


class ImmersionError(ValueError):
    pass


def _flat_block(name, kind, n):
    return Flat.block(name, kind, n) if name else None


def tangent(n, name=None):
    """TV = V + V with coordinates (x, u)."""
    act = ScalingAction.graded([0] * n + [1] * n)
    z = vstack(Matrix.identity(n), Matrix.zeros(n, n))
    return VBSpace(act, z, flat=_flat_block(name, "TM", n), name=name and "T" + name)


def tangent_map(f):
    return block_diag(f, f)


def double_tangent(n, name=None):
    """TTV with coordinates (x, xdot, u, udot); the horizontal action scales the
    dotted coordinates and the vertical one scales u and udot."""
    h = ScalingAction.graded([0] * n + [1] * n + [0] * n + [1] * n)
    v = ScalingAction.graded([0] * 2 * n + [1] * 2 * n)
    a_incl = _spread(n, [0, 2])
    b_incl = _spread(n, [0, 1])
    return DVS(h, v, side_a=tangent(n, name), a_incl=a_incl, side_b=tangent(n), b_incl=b_incl,
               flat=_flat_block(name, "TTM", n), name=name and "TT" + name)


def _spread(n, slots):
    """Embed (y0, y1) into the given two n-slots of a 4n vector."""
    cols = []
    for s in slots:
        for k in range(n):
            c = [0] * (4 * n)
            c[s * n + k] = 1
            cols.append(c)
    return Matrix.from_columns(cols, 4 * n)


def double_tangent_map(f):
    return block_diag(f, f, f, f)


def tangent_of_bundle(e):
    """TE with coordinates (point, tangent).  The horizontal action scales the
    tangent copy, the vertical one is the differential of the bundle action."""
    n = e.dim
    h = ScalingAction.graded([0] * n + [1] * n)
    v = product_action(e.action, e.action)
    a_incl = vstack(Matrix.identity(n), Matrix.zeros(n, n))
    b_incl = block_diag(e.zero_section, e.zero_section)
    flat = e.flat.tangent() if e.flat is not None else None
    return DVS(h, v, side_a=e, a_incl=a_incl, side_b=tangent(e.base_dim), b_incl=b_incl, flat=flat)


def tangent_of_vb_map(phi, te, tf):
    return DVBMap(te, tf, block_diag(phi, phi))


class TwoMap:
    """A commuting square  top: A -> B, left: A -> C, right: B -> D, bottom: C -> D
    with right.top = bottom.left.  Read horizontally it is a 2-map left => right
    with components (bottom, top)."""

    def __init__(self, top, bottom, left, right, direction="horizontal", check=True):
        self.top, self.bottom, self.left, self.right = top, bottom, left, right
        self.direction = direction
        if check and right @ top != bottom @ left:
            raise CompatibilityError("square does not commute")

    def transpose(self):
        return TwoMap(self.left, self.right, self.top, self.bottom,
                      "vertical" if self.direction == "horizontal" else "horizontal")

    def to_json(self):
        return {k: getattr(self, k).to_json() for k in ("top", "bottom", "left", "right")} | {
            "direction": self.direction}


def compose_h(g, f):
    """g o f for 2-maps f: i => j and g: j => k (glued along j)."""
    if f.right != g.left:
        raise CompatibilityError("2-maps are not horizontally composable")
    return TwoMap(g.top @ f.top, g.bottom @ f.bottom, f.left, g.right)


def compose_v(h, f):
    """h . f for 2-maps with f.bottom = h.top (stacked squares)."""
    if f.bottom != h.top:
        raise CompatibilityError("2-maps are not vertically composable")
    return TwoMap(f.top, h.bottom, h.left @ f.left, h.right @ f.right)


def range_lift(f):
    """The 2-map id => f."""
    return TwoMap(Matrix.identity(f.cols), f, Matrix.identity(f.cols), f)


def _base_flat(name, n):
    return Flat.block(name, "M", n) if name else None


def sharp_differential(f, src=None, tgt=None):
    """f_sharp: TM -> f^*TN, (x, u) -> (x, f x, f u)."""
    m, n = f.cols, f.rows
    tm = tangent(m, src)
    pull = pullback_action(f, tangent(n, tgt), base_flat=_base_flat(src, m))
    amb = vstack(Matrix.selection(range(m), 2 * m), tangent_map(f))
    return tm, pull, restrict_ambient(pull, amb)


def pullback_vb_map_by_2map(h, phi, e1, e2):
    """Pullback of a vb-map phi: e1 -> e2 over h.right along the 2-map h
    (h.left => h.right, with h.top, h.bottom mapping into the bases)."""
    if e1.base_map(phi, e2) != h.right:
        raise CompatibilityError("vb-map does not cover the right edge of the 2-map")
    p1 = pullback_action(h.top, e1)
    p2 = pullback_action(h.bottom, e2)
    return p1, p2, restrict_carrier(p1, p2, block_diag(h.left, phi))


def normal_bundle(j, src=None, tgt=None):
    """nu(j) = j^*TN / TM.  Attributes: pull, sharp, tm, q (projection)."""
    if not is_injective(j):
        raise ImmersionError("map is not injective")
    tm, pull, sharp = sharp_differential(j, src, tgt)
    nu = quotient_action(pull, fiber_part(pull, image(sharp)))
    nu.pull, nu.sharp, nu.tm = pull, sharp, tm
    nu.q = nu.presentation.projection
    nu.name = "nu"
    return nu


def normal_differential(f, nu1=None, nu2=None):
    """nu^(2)(F): nu(left) -> nu(right) for a 2-map of immersions."""
    nu1 = nu1 or normal_bundle(f.left)
    nu2 = nu2 or normal_bundle(f.right)
    amb = block_diag(f.top, tangent_map(f.bottom))
    m = restrict_carrier(nu1.pull, nu2.pull, amb)
    return induced_quotient_map(m, nu1.presentation, nu2.presentation)


def is_vb_immersion(phi, e, f):
    return (is_injective(phi) and is_equivariant(phi, e.action, f.action)
            and is_injective(e.base_map(phi, f)))


def vb_normal(phi, e, f, te=None, tf=None, phi_star=None):
    """Normal bundle of a vb-immersion as a double vector space: the horizontal
    quotient of phi_sharp: TE -> phi^{*,h} TF.  Attributes: sharp, pullback."""
    if not is_vb_immersion(phi, e, f):
        raise ImmersionError("map is not a vb-immersion")
    te = te or tangent_of_bundle(e)
    tf = tf or tangent_of_bundle(f)
    phi_star = phi_star or tangent_of_vb_map(phi, te, tf)
    if phi_star.side_a_map() != phi:
        raise CompatibilityError("differential does not restrict to the map on side A")
    sharp = sharpen_h(phi_star)
    nu = quotient_h(sharp)
    nu.sharp = sharp
    nu.pullback = sharp.target
    nu.te, nu.tf = te, tf
    nu.name = "nu_VB"
    return nu


def vb_normal_of_differential(j, src=None, tgt=None):
    """nu(j_*) with TTM and TTN in their standard coordinates."""
    m, n = j.cols, j.rows
    ttm, ttn = double_tangent(m, src), double_tangent(n, tgt)
    return vb_normal(tangent_map(j), tangent(m, src), tangent(n, tgt), ttm, ttn,
                     DVBMap(ttm, ttn, double_tangent_map(j)))


def kappa_flip(ttm, t_tm):
    """The canonical involution TTM -> T(TM) as a flip map."""
    return FlipMap(ttm, t_tm, restrict_perm(ttm, t_tm, kappa_on=(ttm.flat.blocks[0][0],)),
                   kind="total")


class PhiData:
    pass


def Phi(f, src="M", tgt="N"):
    """The flip isomorphism (f_*)^{*,h} TTN -> T(f^*TN).

    Returns an object with: flip (FlipMap), f_star_sharp (TTM -> source),
    f_sharp_star (T(TM) -> T(f^*TN)), kappa (TTM -> T(TM)), and the spaces."""
    m, n = f.cols, f.rows
    ttm, ttn = double_tangent(m, src), double_tangent(n, tgt)
    f_star_sharp = sharpen_h(DVBMap(ttm, ttn, double_tangent_map(f)))
    source = f_star_sharp.target
    tm, pull, fsharp = sharp_differential(f, src, tgt)
    target = tangent_of_bundle(pull)
    flip = FlipMap(source, target, restrict_perm(source, target, kappa_on=(tgt,)), kind="total")
    t_tm = tangent_of_bundle(tm)
    out = PhiData()
    out.flip = flip
    out.ttm, out.ttn, out.pull, out.t_tm = ttm, ttn, pull, t_tm
    out.f_star_sharp = f_star_sharp
    out.f_sharp_star = tangent_of_vb_map(fsharp, t_tm, target)
    out.kappa = kappa_flip(ttm, t_tm)
    return out


def phi_identity_holds(data):
    """Phi o f_{*sharp} = f_{sharp*} o kappa_M."""
    return compose(data.flip, data.f_star_sharp).map == compose(data.f_sharp_star, data.kappa).map


def quotient_tangent_iso(j, f_bundle, e_bundle):
    """For a wide sub-bundle j: F -> E, the identification TE /_v TF -> T(E/F).
    Returns (TE /_v TF, T(E/F), iso DVBMap, E/F)."""
    te, tf = tangent_of_bundle(e_bundle), tangent_of_bundle(f_bundle)
    qv = quotient_v(tangent_of_vb_map(j, tf, te))
    ef = quotient_action(e_bundle, fiber_part(e_bundle, image(j)))
    t_ef = tangent_of_bundle(ef)
    q = ef.presentation.projection
    iso = DVBMap(qv, t_ef, induced_iso(qv.quot.map, tangent_map(q)))
    return qv, t_ef, iso, ef



def quotient_tangent_naturality(phi, psi, j1, j2, f1, e1, f2, e2):
    """For a 2-map (phi, psi): j1 => j2 of wide sub-bundles, the two routes
    TE1 /_v TF1 -> T(E2/F2): through (phi/psi)_* after the identification,
    and through the identification after phi_*/psi_*.  Returns both maps."""
    if phi @ j1 != j2 @ psi:
        raise CompatibilityError("the 2-map does not commute with the embeddings")
    qv1, t1, iso1, ef1 = quotient_tangent_iso(j1, f1, e1)
    qv2, t2, iso2, ef2 = quotient_tangent_iso(j2, f2, e2)
    te1, te2 = qv1.parent, qv2.parent
    tf1, tf2 = qv1.iota.source, qv2.iota.source
    star = quotient_dvb_map(tangent_of_vb_map(phi, te1, te2), tangent_of_vb_map(psi, tf1, tf2),
                            qv1, qv2)
    pq = induced_quotient_map(phi, ef1.presentation, ef2.presentation)
    quot_star = tangent_of_vb_map(pq, t1, t2)
    return compose(quot_star, iso1), compose(iso2, star)


def random_quotient_tangent_instance(seed, top=2):
    """Arguments for quotient_tangent_naturality."""
    rng = random.Random(seed)
    def mat(r, c):
        return Matrix([[rng.randint(-2, 2) for _ in range(c)] for _ in range(r)], c)
    def inj(r, c):
        while True:
            m = mat(r, c)
            if is_injective(m):
                return m
    m1, m2 = rng.randint(0, top), rng.randint(0, top)
    r1, r2 = rng.randint(0, top), rng.randint(0, top + 1)
    s1, s2 = rng.randint(0, r1), rng.randint(0, r2)
    e1, e2 = product_bundle(m1, r1), product_bundle(m2, r2)
    f1, f2 = product_bundle(m1, s1), product_bundle(m2, s2)
    k1, k2 = inj(r1, s1), inj(r2, s2)
    f = mat(m2, m1)
    b = mat(s2, s1)
    kl = left_inverse(k1)
    a = k2 @ b @ kl + mat(r2, r1) @ (Matrix.identity(r1) - k1 @ kl)
    j1, j2 = block_diag(Matrix.identity(m1), k1), block_diag(Matrix.identity(m2), k2)
    return block_diag(f, a), block_diag(f, b), j1, j2, f1, e1, f2, e2

class UpsilonData:
    pass


def Upsilon(j, src="M", tgt="N"):
    """The flip isomorphism nu(j_*) -> T nu(j), built as the quotient flip
    Phi_j / kappa_M followed by the quotient-tangent identification."""
    nu_star = vb_normal_of_differential(j, src, tgt)
    ph = Phi(j, src, tgt)
    if not phi_identity_holds(ph):
        raise CompatibilityError("Phi does not intertwine the sharpened differentials")
    # Phi's source is built exactly as the pullback inside nu(j_*)
    phi = FlipMap(nu_star.pullback, ph.flip.target, ph.flip.map, kind="total")
    qv, t_nu, qt_iso, nu_j = quotient_tangent_iso(sharp_differential(j, src, tgt)[2],
                                                  ph.t_tm.side_a, ph.pull)
    kap = FlipMap(nu_star.iota.source, qv.iota.source, ph.kappa.map, kind="total")
    qflip = quotient_flip(phi, kap, nu_star, qv)
    ups = compose(qt_iso, qflip)
    out = UpsilonData()
    out.flip = ups
    out.nu_star, out.t_nu, out.nu = nu_star, t_nu, nu_j
    out.phi, out.quotient_flip, out.qt_iso = ph, qflip, qt_iso
    return out


# vertical functoriality ----------------------------------------------------

def whitney_sum(b, c):
    """B +_M C as the fiber product of the two projections."""
    carrier, _, _ = fiber_product(b.projection(), c.projection())
    incl, coords = carrier.incl(), carrier.coords()
    act = product_action(b.action, c.action).restrict(incl, coords)
    z = coords @ vstack(b.zero_section, c.zero_section)
    out = VBSpace(act, z)
    out.carrier = carrier
    return out


def _retraction(a, target, big):
    """A vb-map r: big -> target over the identity with r a = id, vanishing on
    the pivot-complement section of big's fiber modulo a(target)."""
    qp = quotient(big.dim, fiber_part(big, image(a)))
    fib = big.p1 - qp.section @ qp.projection @ big.p1
    return target.zero_section @ big.projection() + left_inverse(a) @ fib


def _fiber_frames(e):
    """Inclusion of the fiber and coordinates on it that vanish on the base."""
    f = image(e.p1)
    return f.incl(), f.coords() @ e.p1


class SplittingCertificate:
    pass


def _end(i, j):
    nu_i, nu_j, nu_ji = normal_bundle(i), normal_bundle(j), normal_bundle(j @ i)
    # nu(i) -> nu(j i): (m, n, w) -> (m, j n, j w)
    a = induced_quotient_map(restrict_carrier(nu_i.pull, nu_ji.pull,
                                              block_diag(Matrix.identity(i.cols), tangent_map(j))),
                             nu_i.presentation, nu_ji.presentation)
    # nu(j i) -> i^* nu(j): (m, q, z) -> (m, [i m, q, z])
    inu = pullback_action(i, nu_j)
    lift = restrict_carrier(nu_ji.pull, nu_j.pull, block_diag(i, Matrix.identity(2 * j.rows)))
    amb = vstack(nu_ji.pull.projection(), nu_j.q @ lift) @ nu_ji.presentation.section
    b = restrict_ambient(inu, amb)
    if b @ a != inu.zero_section @ nu_i.projection():
        raise CompatibilityError("inclusion and projection do not compose to zero")
    return nu_i, nu_j, nu_ji, inu, a, b


def vertical_functoriality(h, k):
    """For 2-maps h: i1 => i2 and k: j1 => j2 with h.bottom = k.top, split
    nu(j o i) = i^*nu(j) + nu(i) at both ends and compare nu^(2)(k . h) with
    i^*nu^(2)(k) + nu^(2)(h).

    The target end uses the pivot-complement retraction.  The source retraction
    is corrected, when possible, so that the square commutes; the certificate
    records whether such a correction exists (``commutes``) and whether the
    canonical short exact sequences are respected (``sequence_map``)."""
    if h.bottom != k.top:
        raise CompatibilityError("2-maps are not vertically composable")
    kh = compose_v(k, h)
    nu_i1, nu_j1, nu_ji1, inu1, a1, b1 = _end(h.left, k.left)
    nu_i2, nu_j2, nu_ji2, inu2, a2, b2 = _end(h.right, k.right)
    beta = normal_differential(kh, nu_ji1, nu_ji2)
    alpha = normal_differential(h, nu_i1, nu_i2)
    gamma = restrict_carrier(inu1, inu2, block_diag(h.top, normal_differential(k, nu_j1, nu_j2)))
    cert = SplittingCertificate()
    cert.composite, cert.alpha, cert.gamma = beta, alpha, gamma
    cert.sequence_map = beta @ a1 == a2 @ alpha and b2 @ beta == gamma @ b1

    # retractions r + A X C b with A a fiber frame of nu(i) and C fiber
    # coordinates of i^*nu(j); solve alpha r1 = r2 beta for the corrections
    r1 = _retraction(a1, nu_i1, nu_ji1)
    r2 = _retraction(a2, nu_i2, nu_ji2)
    fa1, _ = _fiber_frames(nu_i1)
    _, fc1 = _fiber_frames(inu1)
    fa2, _ = _fiber_frames(nu_i2)
    _, fc2 = _fiber_frames(inu2)
    rhs = r2 @ beta - alpha @ r1
    cols = []
    for fa, fc, term in ((fa1, fc1, lambda x: alpha @ fa1 @ x @ fc1 @ b1),
                         (fa2, fc2, lambda x: -(fa2 @ x @ fc2 @ b2 @ beta))):
        for p in range(fa.cols):
            for q in range(fc.rows):
                cols.append(_flatten(term(_unit(fa.cols, fc.rows, p, q))))
    cert.commutes = rhs.is_zero()
    # the corrections solve system @ x = target; no solution proves the obstruction
    cert.system = Matrix.from_columns(cols, rhs.rows * rhs.cols)
    cert.target = Matrix([[v] for v in _flatten(rhs)], 1)
    if not cert.commutes and cols:
        x = solve(cert.system, cert.target)
        if x is not None:
            xs = [x[t, 0] for t in range(x.rows)]
            n1 = fa1.cols * fc1.rows
            x1 = Matrix([xs[p * fc1.rows:(p + 1) * fc1.rows] for p in range(fa1.cols)], fc1.rows)
            x2 = Matrix([xs[n1 + p * fc2.rows:n1 + (p + 1) * fc2.rows] for p in range(fa2.cols)],
                        fc2.rows)
            r1 = r1 + fa1 @ x1 @ fc1 @ b1
            r2 = r2 + fa2 @ x2 @ fc2 @ b2
            cert.commutes = True
    ws1, ws2 = whitney_sum(inu1, nu_i1), whitney_sum(inu2, nu_i2)
    iso1 = restrict_ambient(ws1, vstack(b1, r1))
    iso2 = restrict_ambient(ws2, vstack(b2, r2))
    for iso in (iso1, iso2):
        if iso.rows != iso.cols or not is_injective(iso):
            raise CompatibilityError("splitting is not an isomorphism")
    cert.iso_source, cert.iso_target = iso1, iso2
    cert.split_map = restrict_carrier(ws1, ws2, block_diag(gamma, alpha))
    if cert.commutes and iso2 @ beta != cert.split_map @ iso1:
        raise CompatibilityError("corrected splitting does not commute")
    return cert


def _unit(rows, cols, p, q):
    a = Matrix.zeros(rows, cols).tolist()
    a[p][q] = 1
    return Matrix(a, cols)


def _flatten(m):
    return [x for row in m.tolist() for x in row]


# samplers ------------------------------------------------------------------

def _mat(rng, r, c):
    return Matrix([[rng.randint(-2, 2) for _ in range(c)] for _ in range(r)], c)


def _inj(rng, r, c):
    while True:
        m = _mat(rng, r, c)
        if is_injective(m):
            return m


def random_two_map(rng, left, top=None, right_dim=None, top_dim=None):
    """A random 2-map left => right of immersions, with the given top edge if any.
    The bottom edge is solved from right.top = bottom.left."""
    if top is None:
        top = _mat(rng, top_dim if top_dim is not None else left.cols + rng.randint(0, 1),
                   left.cols)
    n = right_dim if right_dim is not None else top.rows + rng.randint(0, 2)
    right = _inj(rng, n, top.rows)
    if left.cols:
        li = left_inverse(left)
        bottom = right @ top @ li + _mat(rng, n, left.rows) @ (Matrix.identity(left.rows) - left @ li)
    else:
        bottom = _mat(rng, n, left.rows)
    return TwoMap(top, bottom, left, right)


def random_immersion(rng, top=3):
    m = rng.randint(0, top)
    return _inj(rng, m + rng.randint(0, 2), m)


def random_h_pair(seed, top=3):
    """2-maps f: j1 => j2 and g: j2 => j3."""
    rng = random.Random(seed)
    f = random_two_map(rng, random_immersion(rng, top))
    g = random_two_map(rng, f.right)
    return f, g


def random_v_pair(seed, top=3):
    """2-maps h: i1 => i2 and k: j1 => j2 with h.bottom = k.top."""
    rng = random.Random(seed)
    h = random_two_map(rng, random_immersion(rng, top))
    j1 = _inj(rng, h.left.rows + rng.randint(0, 2), h.left.rows)
    k = random_two_map(rng, j1, top=h.bottom)
    return h, k


def horizontal_functoriality(f, g):
    """nu^(2)(g o f) and nu^(2)(g) nu^(2)(f)."""
    nus = [normal_bundle(x) for x in (f.left, f.right, g.right)]
    lhs = normal_differential(compose_h(g, f), nus[0], nus[2])
    rhs = normal_differential(g, nus[1], nus[2]) @ normal_differential(f, nus[0], nus[1])
    return lhs, rhs
