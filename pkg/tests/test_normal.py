import pytest
from hypothesis import given, strategies as st

from dnormal.dvb import orthogonal_family_ok
from dnormal.homogeneity import evaluate
from dnormal.linalg import CompatibilityError, Matrix, is_injective
from dnormal.normal import (ImmersionError, Phi, TwoMap, Upsilon, compose_h, compose_v,
                            double_tangent, horizontal_functoriality, normal_bundle,
                            normal_differential, phi_identity_holds, pullback_vb_map_by_2map,
                            quotient_tangent_naturality, random_h_pair, random_quotient_tangent_instance,
                            random_v_pair, range_lift, sharp_differential, tangent, tangent_map,
                            vb_normal_of_differential, vertical_functoriality)

from oracles import matrix_rank, span_dim

I1, I2 = Matrix.identity(1), Matrix.identity(2)
INCL = Matrix([[1], [0]])


def test_tangent_examples():
    t = tangent(2)
    assert t.dim == 4 and t.rank == 2 and t.base_dim == 2
    assert tangent_map(Matrix([[2]])) == Matrix.diag([2, 2])
    tt = double_tangent(1)
    assert tt.dim == 4
    assert evaluate(tt.h, 3) @ evaluate(tt.v, 3) == Matrix.diag([1, 3, 3, 9])


def test_normal_bundle_ranks():
    assert normal_bundle(INCL).rank == 1
    assert normal_bundle(I2).rank == 0
    assert normal_bundle(Matrix.zeros(3, 0)).rank == 3
    with pytest.raises(ImmersionError):
        normal_bundle(Matrix([[1, 1]]))


@given(st.integers(0, 3), st.integers(0, 2), st.randoms(use_true_random=False))
def test_normal_rank_is_codimension(m, extra, rnd):
    n = m + extra
    while True:
        j = Matrix([[rnd.randint(-2, 2) for _ in range(m)] for _ in range(n)], m)
        if matrix_rank(j) == m:
            break
    nu = normal_bundle(j)
    assert nu.rank == n - m and nu.base_dim == m
    tm, pull, sharp = sharp_differential(j)
    assert is_injective(sharp) and sharp.rows == pull.dim


def test_normal_differential_of_identity_square():
    f = TwoMap(I1, I2, INCL, INCL)
    assert normal_differential(f) == Matrix.identity(normal_bundle(INCL).dim)


def test_range_lift_and_sharp_agree():
    # pulling TN back along the range-lift of f is f^*TN, and its map is f_sharp
    f = Matrix([[1], [3]])
    tm, pull, sharp = sharp_differential(f)
    h = range_lift(f)
    p1, p2, m = pullback_vb_map_by_2map(h, tangent_map(f), tangent(1), tangent(2))
    assert p1.dim == tm.dim and p2.dim == pull.dim
    assert m == sharp


def test_two_map_composition_errors():
    f = TwoMap(I1, I2, INCL, INCL)
    g = TwoMap(I2, I2, I2, I2)
    with pytest.raises(CompatibilityError):
        compose_h(g, f)
    with pytest.raises(CompatibilityError):
        compose_v(f, f)
    with pytest.raises(CompatibilityError):
        TwoMap(I1, Matrix([[0, 1], [1, 0]]), INCL, INCL)


@pytest.mark.parametrize("seed", range(50))
def test_horizontal_functoriality(seed):
    lhs, rhs = horizontal_functoriality(*random_h_pair(seed))
    assert lhs == rhs


def test_vb_normal_dimensions():
    nu = vb_normal_of_differential(INCL)
    assert orthogonal_family_ok(nu)
    # nu(j_*) over TM: base 1, side A = TM (rank 1), side B = nu(j) (rank 1), core 1
    assert nu.dims() == {"total": 4, "base": 1, "side_a_rank": 1, "side_b_rank": 1,
                         "core": 1}


@pytest.mark.parametrize("j", [I1, INCL, Matrix([[1, 0], [0, 1], [2, 3]])])
def test_phi_identity_and_bijective(j):
    ph = Phi(j)
    assert phi_identity_holds(ph)
    assert ph.flip.map.rows == ph.flip.map.cols and is_injective(ph.flip.map)


def test_upsilon_for_line_in_plane():
    u = Upsilon(INCL)
    m = u.flip.map
    assert m.rows == m.cols == 4 and is_injective(m)
    assert u.nu_star.dim == 4 and u.t_nu.dim == 4


@pytest.mark.parametrize("seed", range(30))
def test_quotient_tangent_naturality(seed):
    lhs, rhs = quotient_tangent_naturality(*random_quotient_tangent_instance(seed))
    assert lhs.map == rhs.map


def test_vertical_functoriality_identity_pair():
    h = TwoMap(I1, I1, I1, I1)
    k = TwoMap(I1, I1, I1, I1)
    c = vertical_functoriality(h, k)
    assert c.sequence_map and c.commutes


def test_vertical_functoriality_coordinate_inclusions():
    # Q -> Q^2 -> Q^3 with identity top and bottom edges
    i = INCL
    j = Matrix([[1, 0], [0, 1], [0, 0]])
    h = TwoMap(I1, I2, i, i)
    k = TwoMap(I2, Matrix.identity(3), j, j)
    c = vertical_functoriality(h, k)
    assert c.sequence_map and c.commutes
    assert c.iso_source.rows == c.iso_source.cols


@pytest.mark.parametrize("seed", range(40))
def test_vertical_functoriality_sequence_map(seed):
    c = vertical_functoriality(*random_v_pair(seed))
    assert c.sequence_map


def test_vertical_functoriality_obstructed_pair():
    # some random pair admits no compatible splitting; it still maps the sequences
    for seed in range(200):
        c = vertical_functoriality(*random_v_pair(seed))
        if not c.commutes:
            assert c.sequence_map
            return
    pytest.fail("no obstructed pair among the first 200 seeds")


def test_vertical_functoriality_explicit_obstruction():
    # both outer maps vanish on fibers while the composite does not, so no splittings match
    i = INCL
    j1 = Matrix([[1, 0], [0, 1], [0, 0]])
    h = TwoMap(I1, Matrix.diag([1, 0]), i, i)
    k = TwoMap(Matrix.diag([1, 0]), Matrix([[1, 0, 0], [0, 0, 1]]), j1, I2)
    c = vertical_functoriality(h, k)
    assert c.sequence_map and not c.commutes
    assert span_dim(c.system, c.target) > span_dim(c.system)
