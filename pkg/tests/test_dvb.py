import random

import pytest
from hypothesis import given, strategies as st

from dnormal.dvb import (DVBMap, DVS, DVSError, FlipMap, canonical_surmersions, compose,
                         dvs_from_vb_object, fiber_product_dvb, flip_of_map, flip_total, h_lift,
                         identity_flip, induced_iso, lift_map, mixed_quotient_flip,
                         orthogonal_family_ok, pullback_unit, quotient_dvb_map, quotient_flip,
                         quotient_h, quotient_pullback_iso, quotient_v, random_dvb_map, random_dvs,
                         random_invariant_subspace, random_mixed_flip_instance,
                         random_quotient_pullback_instance, sharpen_h, side_pullback_h,
                         side_pullback_v, sub_dvs, v_lift, vb_object_from_dvs)
from dnormal.flat import kappa
from dnormal.homogeneity import ScalingAction, evaluate, product_bundle, trivial_bundle
from dnormal.linalg import CompatibilityError, Matrix, Subspace, hstack, induced_map
from dnormal.normal import double_tangent

dvs_dims = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))


def rdvs(seed, dims=None):
    rng = random.Random(seed)
    dims = dims or [rng.randint(0, 2) for _ in range(4)]
    return rng, random_dvs(rng, *dims)


# structure ----------------------------------------------------------------

@given(dvs_dims, st.integers(0, 10 ** 6))
def test_random_dvs_has_orthogonal_family(dims, seed):
    d = random_dvs(random.Random(seed), *dims)
    assert orthogonal_family_ok(d)
    got = d.dims()
    assert (got["base"], got["side_a_rank"], got["side_b_rank"], got["core"]) == dims


def test_noncommuting_actions_rejected():
    h = ScalingAction.graded([0, 1])
    g = Matrix([[1, 1], [0, 1]])
    v = ScalingAction.graded([1, 0]).conjugate(g, Matrix([[1, -1], [0, 1]]))
    with pytest.raises(DVSError):
        DVS(h, v)


# flips and lifts ----------------------------------------------------------

def test_flip_of_lifts():
    e = product_bundle(1, 2)
    assert flip_total(h_lift(e)).same_structure(v_lift(e))
    assert flip_total(flip_total(h_lift(e))).same_structure(h_lift(e))


def test_flip_of_double_tangent_swaps_gradings():
    tt = double_tangent(1)
    f = flip_total(tt)
    assert evaluate(tt.h, 5) == Matrix.diag([1, 5, 1, 5])
    assert evaluate(tt.v, 5) == Matrix.diag([1, 1, 5, 5])
    assert evaluate(f.h, 5) == Matrix.diag([1, 1, 5, 5])
    assert evaluate(f.v, 5) == Matrix.diag([1, 5, 1, 5])


def test_symmetric_surmersions_and_flip():
    tt = double_tangent(2)
    k = FlipMap(tt, tt, kappa(2))
    ph, pv = canonical_surmersions(tt)
    assert pv.map @ k.map == ph.map
    assert ph.map.rank() == ph.map.rows and pv.map.rank() == pv.map.rows


def test_lift_of_rank_zero_bundle():
    d = h_lift(trivial_bundle(3))
    assert d.h.weights == [0] and d.v.weights == [0]


def test_flip_conjugates_lifted_maps():
    e, f = product_bundle(1, 2), product_bundle(2, 1)
    phi = Matrix([[1, 0, 0], [2, 0, 0], [0, 3, -1]])
    lifted = flip_of_map(lift_map(phi, e, f, "h"))
    target = lift_map(phi, e, f, "v")
    assert lifted.map == target.map
    assert lifted.source.same_structure(target.source)


def test_flip_map_closure():
    _, d = rdvs(4, [1, 1, 1, 1])
    fl = identity_flip(d)
    m = DVBMap(flip_total(d), flip_total(d), Matrix.identity(d.dim))
    assert isinstance(compose(m, fl), FlipMap)
    assert isinstance(compose(fl.inverse(), compose(m, fl)), DVBMap)


# fiber products and side-pullbacks ----------------------------------------

def test_fiber_product_examples():
    _, d = rdvs(1, [1, 1, 1, 1])
    ident = DVBMap(d, d, Matrix.identity(d.dim))
    diag = fiber_product_dvb(ident, ident)
    assert diag.carrier.ambient_dim == 2 * d.dim and diag.dim == d.dim
    ph, _ = canonical_surmersions(d)
    pb = fiber_product_dvb(ph, ph)
    assert pb.dim == 2 * d.dim - ph.target.dim
    zero = DVS(ScalingAction.trivial(0), ScalingAction.trivial(0))
    point = fiber_product_dvb(DVBMap(d, zero, Matrix.zeros(0, d.dim)),
                              DVBMap(zero, zero, Matrix.zeros(0, 0)))
    assert point.dim == d.dim and orthogonal_family_ok(point)


def test_side_pullback_along_identity():
    _, d = rdvs(2, [1, 2, 1, 1])
    u = pullback_unit(d)
    assert u.is_bijective()


@given(st.integers(0, 10 ** 6))
def test_side_pullback_dimensions(seed):
    rng = random.Random(seed)
    d = random_dvs(rng, *[rng.randint(0, 2) for _ in range(4)])
    a = d.side_a
    m = a.base_dim
    e = product_bundle(rng.randint(0, 2), rng.randint(0, 2))
    f = Matrix([[rng.randint(-2, 2) for _ in range(e.base_dim)] for _ in range(m)], e.base_dim)
    fib = d.side_a.fiber.incl()
    a_map = Matrix([[rng.randint(-2, 2) for _ in range(e.rank)] for _ in range(fib.cols)], e.rank)
    phi = hstack(a.zero_section @ f, fib @ a_map)
    p = side_pullback_h(phi, e, d)
    dd = d.dims()
    assert p.dim == e.dim + dd["side_b_rank"] + dd["core"]
    assert orthogonal_family_ok(p)
    # flip lemma: flip of the horizontal pullback is the vertical pullback of the flip
    assert flip_total(p).same_structure(side_pullback_v(phi, e, flip_total(d)))


def test_sharpening_triangle():
    rng, d1 = rdvs(5, [1, 1, 1, 1])
    d2 = random_dvs(rng, 2, 1, 2, 1)
    phi = random_dvb_map(rng, d1, d2)
    s = sharpen_h(phi)
    pr = s.target.carrier.incl().submatrix(rows=range(d1.side_a.dim, s.target.carrier.ambient_dim))
    assert pr @ s.map == phi.map


# vb-objects -----------------------------------------------------------------

def test_double_tangent_as_vb_object():
    tt = double_tangent(1)
    o = vb_object_from_dvs(tt, "horizontal")
    assert o.tau == tt.h and o.violations() == []


def test_lift_is_zero_vb_object():
    e = product_bundle(1, 1)
    o = vb_object_from_dvs(h_lift(e))
    assert o.j == Matrix.identity(e.dim) and o.violations() == []


@pytest.mark.parametrize("seed", range(100))
def test_vb_object_round_trip(seed):
    _, d = rdvs(seed)
    for orient in ("horizontal", "vertical"):
        back = dvs_from_vb_object(vb_object_from_dvs(d, orient))
        assert back.same_structure(d)


def test_vb_object_violation_reported():
    tt = double_tangent(1)
    o = vb_object_from_dvs(tt)
    o.tau = ScalingAction.graded([0, 0, 0, 1])
    assert "iv" in o.violations()
    with pytest.raises(DVSError):
        dvs_from_vb_object(o)


# quotients ------------------------------------------------------------------

def test_quotient_h_extremes():
    _, d = rdvs(6, [1, 1, 2, 1])
    zero_sub = Subspace.span(d.a_incl)
    q0, i0 = sub_dvs(d, zero_sub)
    assert quotient_h(i0).dim == d.dim
    full, ifull = sub_dvs(d, Subspace.full(d.dim))
    assert quotient_h(ifull).dim == d.side_a.dim


@pytest.mark.parametrize("seed", range(30))
def test_quotient_h_dimension_and_cokernel(seed):
    rng, d = rdvs(seed)
    q, iota = sub_dvs(d, random_invariant_subspace(rng, d, "a"))
    qd = quotient_h(iota)
    assert qd.dim == d.dim - q.dim + d.side_a.dim
    assert orthogonal_family_ok(qd)
    # a competitor that kills the fiber part of iota factors uniquely
    g = random_dvb_map(rng, qd, qd)
    comp = g.map @ qd.quot.map
    r = induced_map(qd.quot.map, comp)
    assert r is not None and r == g.map


def test_quotient_h_rejects_bad_embedding():
    _, d = rdvs(7, [1, 1, 1, 1])
    sub = Subspace.span(d.b_incl)
    q, iota = sub_dvs(d, sub, keep="b")
    if d.side_a.rank:
        with pytest.raises(DVSError):
            quotient_h(iota)


def test_quotient_dvb_map_examples():
    rng, d = rdvs(8, [1, 1, 1, 2])
    q, iota = sub_dvs(d, random_invariant_subspace(rng, d, "a"))
    qd = quotient_h(iota)
    ident = DVBMap(d, d, Matrix.identity(d.dim))
    assert quotient_dvb_map(ident, DVBMap(q, q, Matrix.identity(q.dim)), qd, qd).map == \
        Matrix.identity(qd.dim)
    zero = quotient_dvb_map(DVBMap(d, d, Matrix.zeros(d.dim, d.dim)),
                            DVBMap(q, q, Matrix.zeros(q.dim, q.dim)), qd, qd)
    assert zero.map.is_zero()


def test_quotient_of_composites():
    rng, d = rdvs(9, [1, 1, 2, 2])
    q, iota = sub_dvs(d, random_invariant_subspace(rng, d, "a"))
    qd = quotient_h(iota)
    # endomorphisms preserving iota(Q): scale each part
    parts = d.four_projections()
    f = parts["base"] + parts["a_fiber"] + parts["b_fiber"].scale(2) + parts["core"].scale(3)
    g = parts["base"] + parts["a_fiber"].scale(5) + parts["b_fiber"] + parts["core"].scale(-1)
    pf = q.four_projections()
    fq = pf["base"] + pf["a_fiber"] + pf["b_fiber"].scale(2) + pf["core"].scale(3)
    gq = pf["base"] + pf["a_fiber"].scale(5) + pf["b_fiber"] + pf["core"].scale(-1)
    F, G = DVBMap(d, d, f), DVBMap(d, d, g)
    Fq, Gq = DVBMap(q, q, fq), DVBMap(q, q, gq)
    lhs = quotient_dvb_map(compose(G, F), compose(Gq, Fq), qd, qd)
    rhs = compose(quotient_dvb_map(G, Gq, qd, qd), quotient_dvb_map(F, Fq, qd, qd))
    assert lhs.map == rhs.map


def test_quotient_flip_of_identities_by_zero():
    _, d = rdvs(10, [1, 1, 1, 1])
    q, iota = sub_dvs(d, Subspace.span(d.b_incl), keep="b")
    qv = quotient_v(iota)
    qh = quotient_h(flip_of_map(iota))
    r = quotient_flip(identity_flip(d), identity_flip(q), qv, qh)
    assert r.map == Matrix.identity(qv.dim)


@pytest.mark.parametrize("seed", range(100))
def test_total_quotient_flip_is_flip_of_quotient(seed):
    rng, d = rdvs(seed)
    q, iota = sub_dvs(d, random_invariant_subspace(rng, d, "b"), keep="b")
    qv = quotient_v(iota)
    qh = quotient_h(flip_of_map(iota))
    assert qh.same_structure(flip_total(qv))
    r = quotient_flip(identity_flip(d), identity_flip(q), qv, qh)
    assert r.map == Matrix.identity(qv.dim)


@pytest.mark.parametrize("seed", range(20))
def test_mixed_quotient_flip(seed):
    lhs, rhs = mixed_quotient_flip(*random_mixed_flip_instance(seed))
    assert lhs.map == rhs.map and isinstance(lhs, FlipMap) and isinstance(rhs, FlipMap)


@pytest.mark.parametrize("seed", range(20))
def test_quotient_pullback_iso(seed):
    iso, left, right = quotient_pullback_iso(*random_quotient_pullback_instance(seed))
    assert iso.is_bijective()
    assert orthogonal_family_ok(left) and orthogonal_family_ok(right)


def test_induced_iso_rejects_non_bijective():
    with pytest.raises(CompatibilityError):
        induced_iso(Matrix.identity(2), Matrix([[1, 0]]))
