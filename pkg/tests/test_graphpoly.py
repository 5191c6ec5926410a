"""Spanning-tree / two-forest polynomial enumeration."""

from fractions import Fraction

from flowparam.graphpoly import symanzik_f0, symanzik_u

# bubble: two vertices joined by two parallel lines
BUBBLE_EDGES = [(0, 1), (0, 1)]
# sunset: two vertices joined by three parallel lines
SUNSET_EDGES = [(0, 1), (0, 1), (0, 1)]


def test_bubble_first_polynomial():
    # trees are each single edge; the complement weight survives
    assert symanzik_u(2, BUBBLE_EDGES, [3, 5]) == 8
    assert symanzik_u(2, BUBBLE_EDGES, [Fraction(1, 3), Fraction(5, 2)]) \
        == Fraction(17, 6)


def test_bubble_momentum_polynomial():
    # the only two-forest is the empty edge set; P enters vertex 0
    f0 = symanzik_f0(2, BUBBLE_EDGES, [3, 5], {0: (1,), 1: (-1,)})
    assert f0 == {(0, 0): Fraction(15)}


def test_bubble_ratio_equals_parallel_weights():
    # F/U = x1 x2/(x1+x2)
    w = [Fraction(2, 7), Fraction(3, 4)]
    u = symanzik_u(2, BUBBLE_EDGES, w)
    f0 = symanzik_f0(2, BUBBLE_EDGES, w, {0: (1,), 1: (-1,)})
    assert f0[(0, 0)] / u == (w[0] * w[1]) / (w[0] + w[1])


def test_sunset_polynomials():
    w = [2, 3, 5]
    # U = sum over trees (single edges) of the two complement weights
    assert symanzik_u(2, SUNSET_EDGES, w) == 3 * 5 + 2 * 5 + 2 * 3
    f0 = symanzik_f0(2, SUNSET_EDGES, w, {0: (1,), 1: (-1,)})
    assert f0 == {(0, 0): Fraction(30)}


def test_dumbbell_with_two_external_momenta():
    # parallel pair 1,2 between vertices 0-1, bridge of weight 4 to vertex 2;
    # momenta must conserve: P1 in at 0, P2 in at 2, both out at 1
    edges = [(0, 1), (0, 1), (1, 2)]
    w = [Fraction(1), Fraction(2), Fraction(4)]
    u = symanzik_u(3, edges, w)
    assert u == 3
    f0 = symanzik_f0(3, edges, w, {0: (1, 0), 1: (-1, -1), 2: (0, 1)})
    # disjoint paths into the middle vertex: the parallel rule for P1,
    # the bridge alone for P2, no cross term
    assert f0[(0, 0)] / u == Fraction(2, 3)
    assert f0[(1, 1)] / u == 4
    assert (0, 1) not in f0 and (1, 0) not in f0


def test_disconnected_subsets_are_not_forests():
    # square graph: diagonal pair of edges is not a spanning tree
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert symanzik_u(4, edges, [1, 1, 1, 1]) == 4
