import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dnormal import (ImmersionSquare, corner_square, counterexample_square, identity_square,
                     is_regular, random_regular_square, symmetry_iso)
from dnormal.linalg import DimensionError, Matrix
from dnormal.symmetry import (LEMMAS, NotRegular, SquareError, double_normal, psi_flip,
                              random_dims, random_injective, random_square, section_probe,
                              square_from_json, verify_lemma)

from oracles import core_rank, exact_regular

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def load(name):
    return square_from_json(json.loads((SAMPLES / name).read_text()))


def feasible_dims(rng):
    while True:
        d = random_dims(rng, 4)
        if d[2] + d[1] - d[0] <= d[3]:
            return d


# regularity ---------------------------------------------------------------

def test_regularity_examples():
    assert is_regular(identity_square(2))[0]
    assert is_regular(load("clean_intersection.json"))[0]
    ok, report = is_regular(counterexample_square())
    assert not ok
    assert report["kernel_dim"] == 3 and report["expected_kernel_dim"] == 1
    assert "nu2_J_failure" in report and "nu2_I_failure" in report


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_regularity_matches_oracle(seed):
    rng = random.Random(seed)
    d = random_dims(rng, 4)
    try:
        sq = random_square(seed, d)
    except SquareError:
        return
    assert is_regular(sq)[0] == exact_regular(sq)
    assert sq.core_rank() == core_rank(sq)


def test_corner_squares():
    j = Matrix([[1], [0]])
    i = Matrix([[1, 0], [0, 1], [0, 0]])
    sq = corner_square(j, i)
    assert is_regular(sq)[0]
    # both lower edges land in i(Q^2), so the core is Q^3 / i(Q^2)
    assert sq.core_rank() == core_rank(sq) == 1
    dn = double_normal(sq)
    assert (dn.dims()["side_a_rank"], dn.dims()["side_b_rank"], dn.dims()["core"]) == (1, 0, 1)
    assert is_regular(corner_square(Matrix.identity(2), Matrix.identity(2)))[0]
    with pytest.raises(SquareError):
        corner_square(Matrix([[1, 1]]), i)


@pytest.mark.parametrize("seed", range(100))
def test_random_corner_squares_are_regular(seed):
    rng = random.Random(seed)
    m = rng.randint(0, 3)
    n = m + rng.randint(0, 2)
    p = n + rng.randint(0, 1)
    j = random_injective(rng, n, m) if m else Matrix.zeros(n, 0)
    i = random_injective(rng, p, n) if n else Matrix.zeros(p, 0)
    assert exact_regular(corner_square(j, i))


def test_square_validation():
    with pytest.raises(SquareError):
        ImmersionSquare(Matrix([[1]]), Matrix([[2]]), Matrix([[1]]), Matrix([[1]]))
    with pytest.raises(DimensionError):
        ImmersionSquare(Matrix([[1]]), Matrix.identity(2), Matrix([[1]]), Matrix([[1]]))
    with pytest.raises(SquareError):
        ImmersionSquare(Matrix([[0]]), Matrix([[1]]), Matrix([[0]]), Matrix([[1]]))


def test_transpose_round_trip():
    sq = load("clean_intersection.json")
    assert sq.transpose().transpose() == sq


# double normal bundles and the flip -----------------------------------------

def test_double_normal_dimensions():
    dn = double_normal(load("clean_intersection.json"))
    assert dn.dims() == {"total": 4, "base": 1, "side_a_rank": 1, "side_b_rank": 1, "core": 1}
    dn = double_normal(identity_square(2), "I")
    assert dn.dim == 2 and dn.dims()["core"] == 0
    with pytest.raises(NotRegular):
        double_normal(counterexample_square())


def test_psi_consistency():
    sq = load("clean_intersection.json")
    assert verify_lemma("psi-consistency", sq).ok
    p = psi_flip(sq)
    assert p.map.rows == p.map.cols


@pytest.mark.parametrize("name", sorted(LEMMAS))
def test_lemmas_on_examples(name):
    for sq in (identity_square(1), load("clean_intersection.json")):
        r = verify_lemma(name, sq)
        assert r.ok, r.to_json()


def test_unknown_lemma():
    with pytest.raises(KeyError):
        verify_lemma("no-such-lemma", identity_square(1))


def test_regular_only_lemma_refuses_counterexample():
    with pytest.raises(NotRegular):
        verify_lemma("lem.3x3", counterexample_square())


def test_symmetry_on_identity():
    cert = symmetry_iso(identity_square(2))
    assert cert.passed
    assert cert.lam.map == Matrix.identity(2)


def test_symmetry_on_clean_intersection_swaps_sides():
    sq = load("clean_intersection.json")
    cert = symmetry_iso(sq)
    assert cert.passed and all(cert.checks.values())
    lam = cert.lam.map
    assert lam.rows == 4
    assert all(x in (0, 1) for row in lam.tolist() for x in row)
    assert cert.checks["side_matching"]


def test_symmetry_on_counterexample():
    cert = symmetry_iso(counterexample_square())
    assert not cert.passed and cert.lam is None
    assert cert.to_json()["lambda"] is None


@pytest.mark.parametrize("seed", range(15))
def test_symmetry_on_random_regular(seed):
    rng = random.Random(seed)
    sq = random_regular_square(seed, feasible_dims(rng))
    cert = symmetry_iso(sq, lemmas=seed < 5)
    assert cert.passed, cert.to_json()
    assert cert.dims["dn_j"]["core"] == core_rank(sq)


# generators ---------------------------------------------------------------

def test_random_regular_square_deterministic():
    assert random_regular_square(3) == random_regular_square(3)
    sq = random_regular_square(0, (1, 1, 1, 1))
    assert is_regular(sq)[0]
    with pytest.raises(SquareError):
        random_regular_square(0, (2, 1, 1, 1))
    with pytest.raises(SquareError):
        random_regular_square(0, (0, 2, 2, 3))


@pytest.mark.parametrize("seed", range(5))
def test_section_probe(seed):
    assert section_probe(load("clean_intersection.json"), seed)
    assert section_probe(random_regular_square(seed), seed)


# json ---------------------------------------------------------------------

def test_json_round_trip():
    sq = random_regular_square(11)
    assert square_from_json(json.loads(json.dumps(sq.to_json()))) == sq


def test_json_diagnostics():
    doc = identity_square(1).to_json()
    doc["maps"]["i1"][0][0] = "x"
    with pytest.raises(SquareError, match=r"maps.i1\[0\]\[0\]"):
        square_from_json(doc)
    doc = identity_square(1).to_json()
    doc["maps"]["j2"] = []
    with pytest.raises(DimensionError, match="maps.j2 should have 1 rows"):
        square_from_json(doc)
    with pytest.raises(SquareError, match="missing field"):
        square_from_json({"spaces": {}})
