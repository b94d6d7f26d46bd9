import itertools
import math
import random

import numpy as np
import pytest

from sumproduct.graph import (
    IMPLICIT,
    MATERIALIZED,
    GraphCapError,
    build_graph,
    certify,
    common_neighbors_bruteforce,
    common_neighbors_closed_form,
    degree_check,
    edge_count,
    edge_count_bruteforce,
    eigen_spectrum,
    is_connected,
    mixing_check,
    lambda_bound,
    verify_A2_identity,
)
from sumproduct.eigen import power_iteration
from sumproduct.rings import parse_ring


def degree_oracle(ring, a, b):
    """Solutions (u, v) of a + u = b v, counted by enumeration."""
    return sum(1 for u, v in itertools.product(ring.elements(), repeat=2) if a + u == b * v)


@pytest.mark.parametrize("text, n, d", [("zpr:3,1", 9, 3), ("zpr:3,2", 81, 9), ("zpr:5,2", 625, 25)])
def test_build_sizes(text, n, d):
    g = build_graph(parse_ring(text))
    assert (g.n, g.d) == (n, d)


def test_materialized_symmetric_with_loop_diagonal(z9_graph):
    m = z9_graph.matrix
    assert (m == m.T).all()
    ring = z9_graph.ring
    for v in range(z9_graph.n):
        a, b = z9_graph.pair(v)
        assert m[v, v] == (a + a == b * b)


def test_materialization_cap():
    with pytest.raises(GraphCapError):
        build_graph(parse_ring("zpr:3,4"), MATERIALIZED, max_n=4096)
    g = build_graph(parse_ring("zpr:3,4"), IMPLICIT)
    with pytest.raises(GraphCapError):
        g.matrix


@pytest.mark.parametrize("text", ["zpr:3,2", "polyq:3,2,0,1"])
def test_degree_oracle(text):
    ring = parse_ring(text)
    sample = random.Random(0).sample(ring.elements(), 4)
    for a, b in itertools.product(sample, repeat=2):
        assert degree_oracle(ring, a, b) == ring.order


@pytest.mark.parametrize("text", ["zpr:3,2", "zpr:5,2", "polyq:3,2,0,1"])
@pytest.mark.parametrize("mode", [IMPLICIT, MATERIALIZED])
def test_degree_check(text, mode):
    assert degree_check(build_graph(parse_ring(text), mode)) == 0


def test_adjacency_modes_agree(f3x2):
    mat = build_graph(f3x2, MATERIALIZED)
    imp = build_graph(f3x2, IMPLICIT)
    for u, v in itertools.product(range(0, 81, 7), range(81)):
        assert mat.adjacent(u, v) == imp.adjacent(u, v)
    assert mat.adjacent((f3x2.zero, f3x2.zero), (f3x2.zero, f3x2.one))


@pytest.mark.parametrize(
    "U, V, expected", [((0, 0), (1, 1), 1), ((0, 0), (0, 3), 3), ((1, 0), (0, 3), 0)]
)
def test_common_neighbor_examples(z9, U, V, expected):
    g = build_graph(z9)
    U = tuple(z9(x) for x in U)
    V = tuple(z9(x) for x in V)
    assert common_neighbors_bruteforce(g, U, V) == expected
    assert common_neighbors_closed_form(g, U, V) == expected


def test_unique_common_neighbor_is_0_1(z9):
    g = build_graph(z9)
    U, V = g.vertex(0, 0), g.vertex(1, 1)
    common = [w for w in range(g.n) if g.adjacent(w, U) and g.adjacent(w, V)]
    assert common == [g.vertex(0, 1)]


def test_common_neighbors_of_a_vertex_with_itself(z9):
    g = build_graph(z9)
    for v in range(0, g.n, 5):
        assert common_neighbors_closed_form(g, v, v) == 9 == common_neighbors_bruteforce(g, v, v)


def test_common_neighbors_zpr3_3_sample():
    ring = parse_ring("zpr:3,3")
    g = build_graph(ring)
    rng = random.Random(3)
    for _ in range(300):
        u, v = rng.randrange(g.n), rng.randrange(g.n)
        assert common_neighbors_closed_form(g, u, v) == common_neighbors_bruteforce(g, u, v)


@pytest.mark.parametrize("text", ["zpr:3,1", "zpr:3,2", "polyq:3,2,0,1", "zpr:7,1", "polyq:3,1,1,0,1"])
def test_A2_identity(text):
    g = build_graph(parse_ring(text), MATERIALIZED)
    rep = verify_A2_identity(g)
    assert rep.holds and rep.max_deviation == 0 and rep.offending_pair is None
    assert rep.e_zero_empty and rep.valency_ok
    assert bool(rep)


def test_A2_identity_r1_has_no_F_terms():
    rep = verify_A2_identity(build_graph(parse_ring("zpr:3,1"), MATERIALIZED))
    assert rep.f_valency == {} and set(rep.e_valency) == {1}


def test_A2_identity_reports_offending_pair(z9):
    g = build_graph(z9, MATERIALIZED)
    g._matrix = g._matrix.copy()
    g._matrix[0, 1] ^= 1
    g._matrix[1, 0] ^= 1
    rep = verify_A2_identity(g)
    assert not rep.holds and rep.max_deviation > 0 and rep.offending_pair is not None


def test_spectrum_z9(z9_graph):
    vals = eigen_spectrum(z9_graph)
    assert len(vals) == 81
    assert vals[0] == pytest.approx(9, abs=1e-8)
    assert np.sum(np.abs(vals - 9) < 1e-6) == 1
    assert power_iteration(z9_graph.matrix) == pytest.approx(9, abs=1e-8)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(z9_graph.matrix.astype(float))[::-1], atol=1e-9)


def test_certify_z9(z9_graph):
    cert = certify(z9_graph)
    assert cert.bound == pytest.approx(math.sqrt(108))
    assert cert.bound_holds and not cert.bound_nontrivial
    assert cert.connected and cert.non_bipartite
    assert cert.lam <= cert.d
    assert cert.residual <= 1e-8 * cert.d
    doc = cert.to_json()
    for key in ["ring", "n", "d", "lambda", "bound", "bound_holds", "bound_nontrivial", "connected",
                "non_bipartite", "residual"]:
        assert key in doc


def test_certify_z7():
    g = build_graph(parse_ring("zpr:7,1"), MATERIALIZED)
    cert = certify(g)
    assert cert.bound == pytest.approx(math.sqrt(14))
    assert cert.lam <= 3.742
    assert cert.bound_holds and cert.bound_nontrivial


@pytest.mark.parametrize("text", ["zpr:3,1", "zpr:3,2", "polyq:3,2,0,1", "zpr:5,1"])
def test_trace_identities_and_loops(text):
    g = build_graph(parse_ring(text), MATERIALIZED)
    cert = certify(g)
    loops = sum(1 for v in range(g.n) if g.adjacent(v, v))
    assert cert.loops == loops
    tol = 1e-6 * g.n * g.d
    assert cert.trace_error <= tol and cert.trace_sq_error <= tol


@pytest.mark.parametrize("text", ["zpr:3,1", "zpr:3,2", "polyq:3,2,0,1", "zpr:3,3"])
def test_connected_by_bfs(text):
    assert is_connected(build_graph(parse_ring(text)))


def test_lambda_bound_values():
    assert lambda_bound(parse_ring("zpr:5,2")) == pytest.approx(math.sqrt(500))
    assert lambda_bound(parse_ring("zpr:7,1")) == pytest.approx(math.sqrt(14))


def test_edge_count_examples(z9):
    g = build_graph(z9)
    everything = np.arange(g.n)
    assert edge_count(g, everything, everything) == g.n * g.d
    assert edge_count(g, [(z9(0), z9(0))], [(z9(0), z9(1))]) == 1
    assert edge_count(g, [(z9(1), z9(0))], [(z9(0), z9(0))]) == 0
    assert edge_count(g, [], everything) == 0


def test_edge_count_loop_counted_once(z9):
    g = build_graph(z9)
    loop = int(g.loops[0])
    assert edge_count(g, [loop], [loop]) == 1


@pytest.mark.parametrize("text", ["zpr:3,2", "polyq:3,2,0,1", "zpr:5,2"])
def test_edge_count_fast_path_matches_scan_and_is_symmetric(text):
    g = build_graph(parse_ring(text))
    rng = np.random.default_rng(11)
    for _ in range(25):
        B = rng.choice(g.n, size=rng.integers(1, 60), replace=False)
        C = rng.choice(g.n, size=rng.integers(1, 60), replace=False)
        e = edge_count(g, B, C)
        assert e == edge_count_bruteforce(g, B, C) == edge_count(g, C, B)


def test_edge_count_matches_matrix(z9_graph):
    rng = np.random.default_rng(5)
    B = rng.choice(81, 30, replace=False)
    C = rng.choice(81, 20, replace=False)
    assert edge_count(z9_graph, B, C) == int(z9_graph.matrix[np.ix_(B, C)].sum())


def test_mixing_examples(z9_graph):
    cert = certify(z9_graph)
    everything = np.arange(z9_graph.n)
    assert mixing_check(z9_graph, cert, everything, everything)
    for u in range(0, 81, 9):
        for v in range(0, 81, 4):
            assert mixing_check(z9_graph, cert, [u], [v])


@pytest.mark.slow
def test_mixing_random_z25(z25_graph, z25_cert):
    rng = np.random.default_rng(40)
    for _ in range(20):
        B = rng.choice(z25_graph.n, 40, replace=False)
        C = rng.choice(z25_graph.n, 40, replace=False)
        assert mixing_check(z25_graph, z25_cert, B, C)


def test_mixing_check_fails_for_too_small_lambda(z9_graph):
    B = [z9_graph.vertex(0, 0)]
    C = [z9_graph.vertex(0, 1)]
    assert not mixing_check(z9_graph, 0.0, B, C)
