"""Graph polynomials by direct spanning-tree / two-forest enumeration.

Independent cross-check for the reduced quadratic forms: for a Feynman graph
with edge weights x_e, the first polynomial U sums products of weights of
edges NOT in a spanning tree, and the momentum polynomial F(P) sums, over
spanning two-forests, the same products times the square of the momentum
flowing between the two components.  Everything is exact in Fraction
arithmetic; graphs at this scale have at most a handful of edges, so brute
enumeration over edge subsets is the most trustworthy route.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations


def _is_spanning_forest(n_vertices, edges, subset, n_components):
    # union-find over the subset; a forest with k components has
    # n_vertices - k edges and no cycles
    if len(subset) != n_vertices - n_components:
        return None
    parent = list(range(n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for idx in subset:
        u, v = edges[idx]
        ru, rv = find(u), find(v)
        if ru == rv:
            return None
        parent[ru] = rv
    comps = {}
    for v in range(n_vertices):
        comps.setdefault(find(v), []).append(v)
    if len(comps) != n_components:
        return None
    return list(comps.values())


def symanzik_u(n_vertices, edges, weights):
    """First Symanzik polynomial evaluated at exact weights.

    U = sum over spanning trees T of prod_{e not in T} x_e.
    """
    weights = [Fraction(w) for w in weights]
    total = Fraction(0)
    m = len(edges)
    for subset in combinations(range(m), n_vertices - 1):
        if _is_spanning_forest(n_vertices, edges, subset, 1) is None:
            continue
        prod = Fraction(1)
        for e in range(m):
            if e not in subset:
                prod *= weights[e]
        total += prod
    return total


def symanzik_f0(n_vertices, edges, weights, vertex_momenta):
    """Momentum part of the second Symanzik polynomial, at exact weights.

    vertex_momenta maps each vertex to an exact momentum row (tuple of
    Fractions in an arbitrary basis); the squared momentum crossing a
    two-forest cut is formed with the Euclidean bilinear form in that basis,
    which is enough for comparing coefficient ratios entry by entry.
    Returns a dict {basis pair (i, j): Fraction coefficient} of the
    quadratic form in the chosen basis.
    """
    weights = [Fraction(w) for w in weights]
    m = len(edges)
    dim = len(next(iter(vertex_momenta.values())))
    out = {}
    for subset in combinations(range(m), n_vertices - 2):
        comps = _is_spanning_forest(n_vertices, edges, subset, 2)
        if comps is None:
            continue
        prod = Fraction(1)
        for e in range(m):
            if e not in subset:
                prod *= weights[e]
        # momentum flowing into component 0
        flow = [Fraction(0)] * dim
        for v in comps[0]:
            row = vertex_momenta.get(v)
            if row is None:
                continue
            for i in range(dim):
                flow[i] += Fraction(row[i])
        for i in range(dim):
            for j in range(dim):
                if flow[i] and flow[j]:
                    out[(i, j)] = out.get((i, j), Fraction(0)) + prod * flow[i] * flow[j]
    return out
