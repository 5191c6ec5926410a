"""Term construction: channel structure, two-point normalization, counts."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from flowparam import ratexpr as rx
from flowparam import termbuilder as tb
from flowparam.kinematics import (EpsMetricConfig, FourMomentum, ScaleWindow,
                                  flowing_propagator, p_sq_eps)
from flowparam.quadform import ParamVector

A1 = rx.Symbol("alpha", 1)
A2 = rx.Symbol("alpha", 2)

GOLDEN_COUNTS = {(4, 0): 1, (2, 1): 2, (4, 1): 4, (6, 1): 90,
                 (2, 2): 6, (4, 2): 109}

CHANNEL_ROWS = (((1, 1, 0), (1, 1, 0)),
                ((1, 0, 1), (1, 0, 1)),
                ((0, 1, 1), (0, 1, 1)))


def channel_terms(n, l):
    return [t for t in tb.build_gamma_terms(n, l) if t.loops > 0]


def test_term_counts_locked():
    for (n, l), count in GOLDEN_COUNTS.items():
        assert len(tb.build_gamma_terms(n, l)) == count, (n, l)


def test_build_is_memoized():
    assert tb.build_gamma_terms(4, 1) is tb.build_gamma_terms(4, 1)


def test_bare_vertex():
    (t,) = tb.build_gamma_terms(4, 0)
    assert t.coeff == 1 and t.g_power == 1 and t.loops == 0
    assert t.s == 0 and t.i_power == 0
    assert t.rc_factors == () and t.insertions == ()
    assert t.prefactor is rx.S_ONE
    assert all(e.is_zero() for row in t.quad.entries for e in row)


def test_one_loop_channels():
    flow = channel_terms(4, 1)
    assert len(flow) == 3
    env = {A1: Fraction(1, 3), A2: Fraction(5, 2)}
    seen = set()
    for t in flow:
        assert t.coeff == 1 and t.g_power == 2 and t.loops == 1
        assert t.s == 2 and t.n_uv == 0 and t.n_tau == 0
        assert t.theta.orderings == frozenset({(1, 2)})
        assert t.theta.boundary == "below"
        assert t.rc_factors == () and t.insertions == ()
        # the quadratic form is w * row^T row with w = a1*a2/(a1+a2)
        mat = [[rx.evaluate(t.quad.entry(j, k).total, env, exact=True)
                for k in range(3)] for j in range(3)]
        row = tuple(j for j in range(3)
                    if mat[j][j] == Fraction(5, 17))
        assert len(row) == 2
        for j in range(3):
            for k in range(3):
                want = Fraction(5, 17) if (j in row and k in row) else 0
                assert mat[j][k] == want
        assert rx.evaluate(t.quad.mass_part.total, env, exact=True) == 0
        assert rx.evaluate(t.prefactor.total, env, exact=True) \
            == Fraction(36, 289)
        seen.add(row)
    assert seen == {(0, 1), (0, 2), (1, 2)}


def test_one_loop_channel_matches_graph_polynomials():
    # spanning-tree / two-forest ratio for the two-edge self-pairing
    from flowparam.graphpoly import symanzik_f0, symanzik_u
    a1, a2 = Fraction(1, 3), Fraction(5, 2)
    u = symanzik_u(2, [(0, 1), (0, 1)], (a1, a2))
    f0 = symanzik_f0(2, [(0, 1), (0, 1)], (a1, a2), {0: (1,), 1: (-1,)})
    t = channel_terms(4, 1)[0]
    env = {A1: a1, A2: a2}
    diag = max(rx.evaluate(t.quad.entry(j, j).total, env, exact=True)
               for j in range(3))
    assert f0[(0, 0)] / u == diag


def test_one_loop_boundary_carries_renorm_constant():
    terms = tb.build_gamma_terms(4, 1)
    bnd = [t for t in terms if t.rc_factors]
    assert len(bnd) == 1
    assert bnd[0].rc_factors == (("c", 1),)
    assert bnd[0].origins == ("boundary",)
    assert bnd[0].loops == 0 and bnd[0].s == 0


def test_tadpole_flow_term_is_momentum_independent():
    flow = channel_terms(2, 1)
    assert len(flow) == 1
    t = flow[0]
    assert t.coeff == Fraction(1, 2) and t.g_power == 1 and t.s == 1
    assert t.theta.boundary == "above"
    assert any(o.endswith(";onshell") for o in t.origins)
    assert all(e.is_zero() for row in t.quad.entries for e in row)
    assert t.quad.mass_part.is_zero()


def test_offshell_two_point_vanishes_identically_at_one_loop():
    assert tb.offshell_zero(2, 1)
    # at two loops the subtracted difference survives off shell
    assert not tb.offshell_zero(2, 2)


def test_two_point_boundary_has_onshell_monomial():
    terms = tb.build_gamma_terms(2, 1)
    bnd = [t for t in terms if t.rc_factors]
    assert len(bnd) == 1
    assert bnd[0].rc_factors == (("b", 1),)
    assert bnd[0].poly.items == tb.poly_onshell_factor(0).items
    # the monomial is p.p - m^2 over the single external slot
    (pairs0, m20, c0), (pairs1, m21, c1) = bnd[0].poly.items
    assert (pairs0, m20, c0) == (((0, 0),), 0, rx.rat(1))
    assert (pairs1, m21, c1) == ((), 1, rx.rat(-1))


def test_structural_budgets():
    for n, l in ((2, 1), (4, 1), (2, 2), (4, 2)):
        for t in tb.build_gamma_terms(n, l):
            assert t.n_tau <= max(l - 1, 0), (n, l)
            assert sum(i.loop_order for i in t.insertions) < max(l, 1)
            if n == 4:
                assert t.s <= 2 * l
            assert t.eps_power == 0   # no deformation-power terms below l=3


def test_two_loop_insertion_inventory():
    c42 = tb.build_gamma_terms(4, 2)
    with_ins = [t for t in c42 if t.insertions]
    assert len(with_ins) == 9
    for t in with_ins:
        assert all(i.loop_order == 1 for i in t.insertions)
        assert all(1 <= i.anchor <= t.s for i in t.insertions)
    kinds = sorted(t.rc_factors for t in c42 if t.rc_factors)
    assert kinds == [(("c", 1),)] * 3 + [(("c", 2),)]


# --- propagator-cancellation pieces --------------------------------------------

def test_mass_shell_cancellation_identity():
    # (q^2_eps - m^2) C^{xi,a}(q) = i e^{i xi x} - i e^{i a x} - i eps m^2 C
    cfg = EpsMetricConfig(0.07, 1.3)
    q = FourMomentum(1.9, 0.4, -0.2, 0.6)
    xi, a = 0.3, 2.4
    c = flowing_propagator(q, ScaleWindow(xi, a), cfg)
    x = p_sq_eps(q, cfg) - cfg.mass2_eps
    lhs = (p_sq_eps(q, cfg) - cfg.mass ** 2) * c
    rhs = (1j * np.exp(1j * xi * x) - 1j * np.exp(1j * a * x)
           - 1j * cfg.eps * cfg.mass ** 2 * c)
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_propagator_pieces_structure():
    base = channel_terms(2, 1)[0]
    t1, t2, t3 = tb.offshell_propagator_pieces(base, (Fraction(1),))
    s = base.s

    assert t1.n_uv == base.n_uv + 1
    assert t1.coeff == base.coeff
    assert t1.i_power == (base.i_power + 1) % 4
    assert rx.Symbol("uv", t1.n_uv) in t1.sum_ir
    assert all(o.endswith(";cancel-bottom") for o in t1.origins)

    assert t2.coeff == -base.coeff
    assert t2.s == base.s
    assert rx.Symbol("alpha", s) in t2.sum_ir
    assert all(o.endswith(";cancel-top") for o in t2.origins)

    assert t3.coeff == -base.coeff
    assert t3.s == base.s + 1
    assert t3.eps_power == base.eps_power + 1
    assert (s, s + 1) in t3.theta.orderings
    assert all(m2 == bm2 + 1 for (_, m2, _), (_, bm2, _)
               in zip(t3.poly.items, base.poly.items))
    assert all(o.endswith(";cancel-eps") for o in t3.origins)

    env = {A1: Fraction(1, 2)}
    v1 = rx.evaluate(t1.quad.entry(0, 0).total,
                     {**env, rx.Symbol("uv", 1): Fraction(1, 5)}, exact=True)
    v2 = rx.evaluate(t2.quad.entry(0, 0).total, env, exact=True)
    assert v1 == Fraction(1, 5) and v2 == Fraction(1, 2)


# --- quadrature-facing constants ------------------------------------------------

def eta_extrapolated_time_factor(alpha, etas):
    """int dp0 exp(i alpha p0^2), regularized by exp(-eta p0^2) and
    extrapolated polynomially to eta = 0."""
    vals = []
    for eta in etas:
        cut = math.sqrt(39.0 / eta)

        def f(p):
            return np.exp((1j * alpha - eta) * p * p)

        re = quad(lambda p: f(p).real, -cut, cut, limit=8000,
                  epsabs=1e-11, epsrel=1e-11)[0]
        im = quad(lambda p: f(p).imag, -cut, cut, limit=8000,
                  epsabs=1e-11, epsrel=1e-11)[0]
        vals.append(re + 1j * im)
    # Lagrange value at eta = 0
    out = 0j
    for i, ei in enumerate(etas):
        w = 1.0
        for j, ej in enumerate(etas):
            if j != i:
                w *= ej / (ej - ei)
        out += w * vals[i]
    return out


def test_loop_constant_against_gaussian_quadrature():
    cfg = EpsMetricConfig(0.1, 1.0)
    alpha = 1.7
    time_factor = eta_extrapolated_time_factor(
        alpha, (0.08, 0.04, 0.02, 0.01))

    def fs(p):
        return np.exp(-1j * alpha * (1 - 1j * cfg.eps) * p * p)

    cut = math.sqrt(39.0 / (alpha * cfg.eps))
    re = quad(lambda p: fs(p).real, -cut, cut, limit=8000,
              epsabs=1e-11, epsrel=1e-11)[0]
    im = quad(lambda p: fs(p).imag, -cut, cut, limit=8000,
              epsabs=1e-11, epsrel=1e-11)[0]
    space_factor = re + 1j * im

    from flowparam.evaluator import loop_constant
    measured = 1j * alpha ** 2 * time_factor * space_factor ** 3 \
        / (2 * math.pi) ** 4
    want = loop_constant(cfg)
    assert abs(measured - want) <= 2e-4 * abs(want)


def test_onshell_mass_constant_envelope():
    cfg = EpsMetricConfig(0.05, 1.0)
    rc = tb.RenormConditions(g=1.0)
    xi = 0.5
    a = tb.onshell_mass_constant(1, rc, cfg, xi)
    assert abs(a) <= 1.0 / (32 * math.pi ** 2 * xi) * (1 + 1e-9)
    a2 = tb.onshell_mass_constant(1, rc, cfg, 2.0)
    assert abs(a2) < abs(a)
    far = tb.onshell_mass_constant(1, rc, cfg, 1e5)
    assert abs(far) <= 1.0 / (32 * math.pi ** 2 * 1e5) * (1 + 1e-9)


# --- serialization ---------------------------------------------------------------

def test_term_roundtrip(tmp_path):
    terms = tb.build_gamma_terms(4, 2)
    path = tmp_path / "terms.json"
    tb.dump_terms(terms, path)
    loaded = tb.load_terms(path)
    assert len(loaded) == len(terms)
    for a, b in zip(terms, loaded):
        assert a.canonical_key() == b.canonical_key()
        assert a.coeff == b.coeff and a.i_power == b.i_power
        assert a.theta == b.theta and a.insertions == b.insertions
    second = tmp_path / "again.json"
    tb.dump_terms(loaded, second)
    assert path.read_bytes() == second.read_bytes()


def test_canonical_order_is_deterministic():
    terms = tb.build_gamma_terms(4, 2)
    flow = [t for t in terms if "boundary" not in t.origins]
    keys = [t.canonical_key() for t in flow]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
    # renorm-constant terms close the list
    tail = terms[len(flow):]
    assert all("boundary" in t.origins for t in tail)
