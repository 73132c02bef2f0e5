import json
import math

import numpy as np
import pytest

from upb import (
    Constellation,
    DimensionError,
    ParseError,
    ValidationError,
    chordal_packing_radius,
    diversity_product,
    diversity_sum,
    diversity_summary,
    haar_sample,
    load_constellation,
    random_search,
    riemannian_distance,
    save_constellation,
    unitarity_residual,
)


def roots_of_unity(m):
    return [np.array([[np.exp(2j * np.pi * k / m)]]) for k in range(m)]


def pair(a, b):
    return Constellation([np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)])


# --- diversity metrics --------------------------------------------------------


def test_antipodal_pair_metrics():
    v = pair(np.eye(2), -np.eye(2))
    s = diversity_summary(v)
    assert s.diversity_sum == pytest.approx(1.0)
    assert s.diversity_product == pytest.approx(1.0)
    assert s.sum_pair == (0, 1) and s.product_pair == (0, 1)


def test_reflection_pair_not_fully_diverse():
    v = pair(np.eye(2), np.diag([1.0, -1.0]))
    assert diversity_sum(v) == pytest.approx(1.0 / math.sqrt(2.0))
    assert diversity_product(v) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("m", [2, 3, 4, 8])
def test_roots_of_unity_metrics(m):
    v = Constellation(roots_of_unity(m))
    expected = math.sin(math.pi / m)
    assert diversity_sum(v) == pytest.approx(expected, rel=1e-12)
    assert diversity_product(v) == pytest.approx(expected, rel=1e-12)


def test_summary_identifies_minimizing_pair():
    # three points on the circle with one close pair (indices 1, 2)
    v = Constellation(
        [np.array([[1.0 + 0j]]), np.array([[np.exp(2.9j)]]), np.array([[np.exp(3.1j)]])]
    )
    s = diversity_summary(v)
    assert s.sum_pair == (1, 2)
    assert s.diversity_sum == pytest.approx(math.sin(0.1), rel=1e-9)


def test_metrics_invariant_under_global_rotation():
    rng = np.random.default_rng(17)
    members = [haar_sample(3, rng) for _ in range(4)]
    v = Constellation(members)
    g = haar_sample(3, rng).array
    rotated = Constellation([g @ u.array for u in members])
    assert diversity_sum(rotated) == pytest.approx(diversity_sum(v), abs=1e-10)
    assert diversity_product(rotated) == pytest.approx(diversity_product(v), abs=1e-10)


def test_product_le_sum_random():
    rng = np.random.default_rng(23)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(2, 8))
        v = Constellation([haar_sample(n, rng) for _ in range(m)])
        assert diversity_product(v) <= diversity_sum(v) + 1e-12


# --- riemannian distance --------------------------------------------------------


def test_riemannian_distance_examples():
    assert riemannian_distance(np.eye(2), -np.eye(2)) == pytest.approx(math.pi * math.sqrt(2.0))
    assert riemannian_distance(np.eye(2), np.diag([1.0, -1.0])) == pytest.approx(math.pi)
    assert riemannian_distance(np.eye(3), np.eye(3)) == pytest.approx(0.0, abs=1e-8)


def test_riemannian_distance_symmetry():
    rng = np.random.default_rng(29)
    a, b = haar_sample(3, rng), haar_sample(3, rng)
    assert riemannian_distance(a, b) == pytest.approx(riemannian_distance(b, a), rel=1e-10)


def test_riemannian_distance_rejects_mixed_shapes():
    with pytest.raises(DimensionError):
        riemannian_distance(np.eye(2), np.eye(3))


# --- packing radius ---------------------------------------------------------------


def test_packing_radius_examples():
    assert chordal_packing_radius(pair(np.eye(2), -np.eye(2))) == pytest.approx(2.0)
    # n=1 at Frobenius distance sqrt(2): radius 2 sin(pi/8)
    v = pair([[1.0]], [[1j]])
    assert chordal_packing_radius(v) == pytest.approx(2.0 * math.sin(math.pi / 8.0), rel=1e-12)


def test_packing_radius_small_distance_limit():
    d = 1e-4
    v = pair([[1.0]], [[np.exp(2j * np.arcsin(d / 2.0))]])
    r = chordal_packing_radius(v)
    assert r / d == pytest.approx(0.5, rel=0.01)


# --- constellation construction ------------------------------------------------------


def test_constellation_validates_membership():
    with pytest.raises(ValidationError):
        Constellation([np.eye(2)])  # m must be >= 2
    with pytest.raises(ValidationError):
        Constellation([np.eye(2), np.eye(3)])  # mixed dimensions
    with pytest.raises(ValidationError):
        Constellation([np.eye(2), np.eye(2)])  # duplicates
    with pytest.raises(ValidationError):
        Constellation([np.eye(2), 2.0 * np.eye(2)])  # not unitary


def test_constellation_accepts_wrappers_and_arrays():
    v = Constellation([haar_sample(2, 1), np.eye(2)])
    assert v.n == 2 and v.m == 2


# --- random search ---------------------------------------------------------------------


def test_random_search_deterministic():
    a, score_a = random_search(2, 4, 300, seed=5)
    b, score_b = random_search(2, 4, 300, seed=5)
    assert score_a == score_b
    for x, y in zip(a.members, b.members):
        np.testing.assert_array_equal(x.array, y.array)


def test_random_search_near_circle_optimum():
    _, score = random_search(1, 4, 5000, seed=6)
    assert score >= 0.95 * math.sin(math.pi / 4.0)


def test_random_search_members_are_unitary():
    best, score = random_search(2, 3, 200, seed=8)
    assert best.m == 3
    assert score > 0.0
    for u in best.members:
        assert unitarity_residual(u) <= 1e-10


def test_random_search_product_objective():
    best, score = random_search(2, 3, 300, seed=9, objective="product")
    assert score == pytest.approx(diversity_product(best), rel=1e-12)
    assert score <= diversity_sum(best) + 1e-12


def test_random_search_validates_arguments():
    with pytest.raises(ValidationError):
        random_search(1, 4, 0, seed=1)
    with pytest.raises(ValidationError):
        random_search(1, 4, 10, seed=1, objective="trace")


# --- save / load -------------------------------------------------------------------------


def test_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(41)
    v = Constellation([haar_sample(3, rng) for _ in range(4)], label="round-trip")
    path = tmp_path / "v.json"
    save_constellation(v, path)
    back = load_constellation(path)
    assert back.label == "round-trip"
    assert back.n == 3 and back.m == 4
    for x, y in zip(v.members, back.members):
        np.testing.assert_array_equal(x.array, y.array)


def test_saved_file_is_plain_json_with_stable_keys(tmp_path):
    v = Constellation([np.eye(2), -np.eye(2)])
    path = tmp_path / "v.json"
    save_constellation(v, path)
    text = path.read_text()
    doc = json.loads(text)
    assert list(doc.keys()) == ["n", "matrices"]
    assert doc["n"] == 2
    assert doc["matrices"][0][0][0] == [1.0, 0.0]
    assert text.index('"n"') < text.index('"matrices"')


def test_load_rejects_malformed_files(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(ParseError):
        load_constellation(missing)

    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    with pytest.raises(ParseError):
        load_constellation(bad_json)

    bad_entry = tmp_path / "entry.json"
    bad_entry.write_text(json.dumps({"n": 1, "matrices": [[["x", 0.0]], [[0.0, 1.0]]]}))
    with pytest.raises(ParseError):
        load_constellation(bad_entry)

    too_few = tmp_path / "few.json"
    too_few.write_text(json.dumps({"n": 1, "matrices": [[[1.0, 0.0]]]}))
    with pytest.raises(ParseError):  # structurally malformed: fewer than 2 members
        load_constellation(too_few)


def test_load_names_offending_matrix(tmp_path):
    doc = {
        "n": 2,
        "matrices": [
            [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
            [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        ],
    }
    path = tmp_path / "v.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError, match="matrix 1"):
        load_constellation(path)


def test_load_rejects_wrong_shape(tmp_path):
    doc = {"n": 2, "matrices": [[[[1.0, 0.0]]], [[[0.0, 1.0]]]]}
    path = tmp_path / "v.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError):
        load_constellation(path)
