"""Quadrature engine, oracles, threshold scan, shell prober."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import dblquad

from flowparam import evaluator as ev
from flowparam import ratexpr as rx
from flowparam import termbuilder as tb
from flowparam.kinematics import (EpsMetricConfig, FourMomentum, ScaleWindow,
                                  renorm_point)

CFG = EpsMetricConfig(0.05, 1.0)
RC = tb.RenormConditions(g=1.3)
XI = 0.1


def s_channel_term():
    env = {rx.Symbol("alpha", 1): Fraction(1, 3),
           rx.Symbol("alpha", 2): Fraction(5, 2)}
    for t in tb.build_gamma_terms(4, 1):
        if not t.loops:
            continue
        if rx.evaluate(t.quad.entry(0, 0).total, env, exact=True) != 0 \
           and rx.evaluate(t.quad.entry(1, 1).total, env, exact=True) != 0:
            return t
    raise AssertionError("missing channel")


def request(momenta, window, budget=300_000, cfg=CFG, rc=RC):
    return ev.EvalRequest(momenta=momenta, cfg=cfg, window=window, rc=rc,
                          budget=budget)


def test_zero_order_vertex_is_bare_coupling():
    req = request((FourMomentum(1.0), FourMomentum(0.5, 0.1),
                   FourMomentum(-0.8, 0.2)), ScaleWindow(XI, math.inf))
    out = ev.vertex_value(4, 0, req)
    assert out.value == 1.3 + 0j
    assert out.err == 0.0 and out.neval == 1


def test_channel_term_at_zero_momentum_matches_planar_oracle():
    # with vanishing channel momentum the reduced integrand collapses to
    # (a1+a2)^{-2} exp(-i m2_eps (a1+a2)) over the ordered window square
    p1 = FourMomentum(0.3, 0.1, 0.0, 0.0)
    a_top = 6.0
    req = request((p1, -p1, FourMomentum(0.9, 0.0, 0.2, 0.0)),
                  ScaleWindow(XI, a_top), budget=400_000)
    out = ev.evaluate_term(s_channel_term(), req)

    m2e = CFG.mass2_eps

    def f(a1, a2):
        return (a1 + a2) ** -2 * np.exp(-1j * m2e * (a1 + a2))

    ordered = dblquad(lambda a1, a2: f(a1, a2).real, XI, a_top,
                      lambda a2: XI, lambda a2: a2,
                      epsabs=1e-13, epsrel=1e-13)[0] \
        + 1j * dblquad(lambda a1, a2: f(a1, a2).imag, XI, a_top,
                       lambda a2: XI, lambda a2: a2,
                       epsabs=1e-13, epsrel=1e-13)[0]
    want = RC.g ** 2 * ev.loop_constant(CFG) * ordered
    assert abs(out.value - want) <= 1e-8 * abs(want)
    assert out.err <= 1e-8 * abs(want)


def test_theta_ordering_consumes_half_the_symmetric_square():
    # same collapse as above; the integrand is a1 <-> a2 symmetric, so the
    # ordered integral must equal half the full square
    p1 = FourMomentum(0.3, 0.1, 0.0, 0.0)
    a_top = 6.0
    req = request((p1, -p1, FourMomentum(0.9, 0.0, 0.2, 0.0)),
                  ScaleWindow(XI, a_top), budget=400_000)
    out = ev.evaluate_term(s_channel_term(), req)

    m2e = CFG.mass2_eps

    def f(a1, a2):
        return (a1 + a2) ** -2 * np.exp(-1j * m2e * (a1 + a2))

    square = dblquad(lambda a1, a2: f(a1, a2).real, XI, a_top,
                     lambda a2: XI, lambda a2: a_top,
                     epsabs=1e-13, epsrel=1e-13)[0] \
        + 1j * dblquad(lambda a1, a2: f(a1, a2).imag, XI, a_top,
                       lambda a2: XI, lambda a2: a_top,
                       epsabs=1e-13, epsrel=1e-13)[0]
    want = RC.g ** 2 * ev.loop_constant(CFG) * square / 2
    assert abs(out.value - want) <= 1e-8 * abs(want)


def test_subtracted_two_point_vanishes_off_shell():
    p = FourMomentum(1.7, 0.3, 0.0, 0.1)
    req = request((p,), ScaleWindow(XI, math.inf))
    out = ev.vertex_value(2, 1, req)
    assert out.value == 0j


def test_two_point_at_finite_top_equals_onshell_tail():
    p = FourMomentum(1.7, 0.3, 0.0, 0.1)
    a_top = 4.0
    out = ev.vertex_value(2, 1, request((p,), ScaleWindow(XI, a_top)))
    tail = ev.onshell_twopoint_value(1, a_top, RC, CFG, XI)
    assert abs(out.value - tail) <= 1e-12 * abs(tail)


def test_deformation_damping_is_monotone():
    t = [t for t in tb.build_gamma_terms(2, 1) if t.loops][0]
    p = FourMomentum(1.0)
    mags = []
    for eps in (0.3, 0.1, 0.03):
        req = request((p,), ScaleWindow(XI, 5.0),
                      cfg=EpsMetricConfig(eps, 1.0))
        mags.append(abs(ev.evaluate_term(t, req).value))
    assert mags[0] <= mags[1] * (1 + 1e-12)
    assert mags[1] <= mags[2] * (1 + 1e-12)


def test_eps_zero_needs_finite_window():
    t = s_channel_term()
    p1 = FourMomentum(0.3, 0.1, 0.0, 0.0)
    momenta = (p1, -p1, FourMomentum(0.9, 0.0, 0.2, 0.0))
    cfg0 = EpsMetricConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        ev.evaluate_term(t, request(momenta, ScaleWindow(XI, math.inf),
                                    cfg=cfg0))
    out = ev.evaluate_term(t, request(momenta, ScaleWindow(XI, 3.0),
                                      cfg=cfg0))
    assert np.isfinite(out.value.real) and np.isfinite(out.value.imag)


def test_eps_power_terms_are_dropped_and_counted():
    base = [t for t in tb.build_gamma_terms(2, 1) if t.loops][0]
    flagged = tb.offshell_propagator_pieces(base, (Fraction(1),))[2]
    req = request((FourMomentum(1.0),), ScaleWindow(XI, 5.0))
    out = ev.evaluate_term(flagged, req)
    assert out.value == 0j and out.dropped == 1
    kept = ev.EvalRequest(momenta=(FourMomentum(1.0),), cfg=CFG,
                          window=ScaleWindow(XI, 5.0), rc=RC,
                          drop_eps_terms=False, budget=100_000)
    out2 = ev.evaluate_term(flagged, kept)
    assert out2.dropped == 0


# --- on-shell two-point distances ------------------------------------------------

def test_onshell_value_dies_at_infinite_anchor():
    assert ev.onshell_twopoint_value(1, math.inf, RC, CFG, XI) == 0j


def test_onshell_value_envelope_and_monotone_decay():
    prev = None
    for a in (0.3, 1.0, 3.0, 10.0, 50.0):
        v = abs(ev.onshell_twopoint_value(1, a, RC, CFG, XI))
        assert v <= RC.g / (32 * math.pi ** 2 * a) * (1 + 1e-9)
        if prev is not None:
            assert v < prev
        prev = v


def test_flow_derivative_closed_form_modulus():
    for a in (0.5, 1.9, 7.0):
        got = abs(ev.flow_derivative_onshell(1, a, RC, CFG, XI))
        want = 0.5 * RC.g * math.exp(-CFG.eps * a) / (
            16 * math.pi ** 2 * a ** 2 * abs(1 - 1j * CFG.eps) ** 1.5)
        assert abs(got - want) <= 1e-12 * want


def test_flow_derivative_is_derivative_of_onshell_value():
    a = 1.9
    h = 1e-4
    fd = (ev.onshell_twopoint_value(1, a + h, RC, CFG, XI, n_panels=128)
          - ev.onshell_twopoint_value(1, a - h, RC, CFG, XI,
                                      n_panels=128)) / (2 * h)
    fdo = ev.flow_derivative_onshell(1, a, RC, CFG, XI)
    assert abs(fd - fdo) <= 1e-6 * abs(fdo)


def test_flow_derivative_envelope_on_log_grid():
    bound = RC.g / (32 * math.pi ** 2)
    for a in np.geomspace(XI, 1e3 * XI, 20):
        assert abs(ev.flow_derivative_onshell(1, a, RC, CFG, XI)) \
            <= bound / a ** 2 * (1 + 1e-12)


# --- channel amplitude oracle ----------------------------------------------------

def test_bubble_oracle_grows_logarithmically_deep_euclidean():
    s_vals = -np.geomspace(1e4, 1e8, 10)
    mags = np.array([abs(ev.bubble_oracle(s, 1.0, 1e-6)) for s in s_vals])
    slope = np.polyfit(np.log(-s_vals), mags, 1)[0]
    assert slope > 0
    # the coefficient of the large-|s| logarithm is 1/(32 pi^2)
    assert abs(slope * 32 * math.pi ** 2 - 1.0) <= 1e-2


def test_bubble_oracle_linear_continuity_at_origin():
    m, eps = 1.0, 1e-8
    b0 = ev.bubble_oracle(0.0, m, eps)
    assert abs(b0) <= 1e-10
    r1 = abs(ev.bubble_oracle(1e-4, m, eps)) / 1e-4
    r2 = abs(ev.bubble_oracle(1e-5, m, eps)) / 1e-5
    assert abs(r1 - r2) <= 1e-3 * r1


def test_bubble_oracle_imaginary_onset_at_threshold():
    m, eps = 1.0, 1e-8
    below = ev.bubble_oracle(3.9, m, eps)
    above = ev.bubble_oracle(4.1, m, eps)
    assert abs(below.imag) <= 1e-6
    assert above.imag > 1e-3


def test_oracle_prediction_vanishes_at_renormalization_point():
    rc = tb.RenormConditions(g=1.0, c1=0.0, point=renorm_point(1.0))
    v = ev.oracle_vertex_prediction(rc.point[:3], rc, CFG)
    assert v == 0j


def test_matched_vertex_vanishes_at_renormalization_point():
    cfg = EpsMetricConfig(0.05, 1.0)
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    c1 = ev.matching_constant(cfg, rc, XI, budget=200_000)
    rcm = tb.RenormConditions(g=1.0, c1=c1, point=rc.point)
    req = ev.EvalRequest(momenta=rc.point[:3], cfg=cfg,
                         window=ScaleWindow(XI, math.inf), rc=rcm,
                         budget=200_000)
    out = ev.vertex_value(4, 1, req)
    assert abs(out.value) <= 1e-6


# --- extrapolation and threshold scan ---------------------------------------------

def test_extrapolation_recovers_sqrt_model_exactly():
    a, b, c = 0.7 - 0.2j, 0.31j, -1.4
    eps_list = (0.016, 0.008, 0.004)
    vals = [a + b * math.sqrt(e) + c * e for e in eps_list]
    fit, drift = ev.extrapolate_eps(eps_list, vals)
    assert abs(fit - a) <= 1e-12
    t2, t3 = math.sqrt(eps_list[1]), math.sqrt(eps_list[2])
    v2, v3 = vals[1], vals[2]
    lin = v3 + (v2 - v3) / (t2 - t3) * (0.0 - t3)
    assert abs(drift - abs(fit - lin)) <= 1e-12


def test_extrapolation_needs_three_points():
    assert ev.extrapolate_eps((0.02, 0.01), [1.0, 1.1]) == (None, None)


def test_scan_rows_schema_and_determinism():
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    kwargs = dict(rc=rc, mass=1.0, xi=1e-4, budget=120_000)
    rows = ev.continuity_scan((3.6, 4.4), (0.064, 0.032, 0.016), **kwargs)
    assert len(rows) == 6
    keys = {"s", "eps", "re", "im", "err_est",
            "extrapolated_re", "extrapolated_im"}
    for r in rows:
        assert set(r) == keys
        assert r["err_est"] >= 0.0
    svals = [r["s"] for r in rows]
    assert svals == sorted(svals)
    again = ev.continuity_scan((3.6, 4.4), (0.064, 0.032, 0.016), **kwargs)
    assert rows == again


def test_scan_below_threshold_extrapolates_to_real_value():
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    rows = ev.continuity_scan((3.6,), (0.064, 0.032, 0.016), rc, 1.0, 1e-4,
                              budget=120_000)
    last = rows[-1]
    assert abs(last["extrapolated_im"]) <= 5e-4
    assert last["extrapolated_re"] < 0


def test_scan_parallel_matches_serial():
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    kwargs = dict(rc=rc, mass=1.0, xi=1e-4, budget=60_000)
    serial = ev.continuity_scan((4.4,), (0.064, 0.032), workers=1, **kwargs)
    parallel = ev.continuity_scan((4.4,), (0.064, 0.032), workers=2, **kwargs)
    assert serial == parallel


def test_scan_short_eps_list_skips_extrapolation():
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    rows = ev.continuity_scan((4.4,), (0.064, 0.032), rc, 1.0, 1e-4,
                              budget=60_000)
    assert all(r["extrapolated_re"] is None for r in rows)
    assert all(r["extrapolated_im"] is None for r in rows)


def test_scan_validates_regulator_list():
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    with pytest.raises(ValueError):
        ev.continuity_scan((3.6,), (0.016, 0.032), rc, 1.0, 1e-4)
    with pytest.raises(ValueError):
        ev.continuity_scan((3.6,), (0.016, 0.008, -0.1), rc, 1.0, 1e-4)


# --- shell prober ------------------------------------------------------------------

def test_resonant_measure_trivial_interval():
    assert ev.resonant_set_measure(0.0, 0.0, 0.0, 2.0, 9.0, 5.0) \
        == pytest.approx(3.0, abs=1e-12)


def test_resonant_measure_double_root_case():
    # f(x) = (x - 3)^2 / x, |f| <= 2 on [4 - sqrt(7), 4 + sqrt(7)]
    got = ev.resonant_set_measure(9.0, -6.0, 0.0, 1.0, 20.0, 2.0)
    assert got == pytest.approx(2 * math.sqrt(7.0), rel=1e-9)


def test_resonant_measure_bound_on_shells():
    rng = np.random.default_rng(5)
    big_m = 2.0
    for nu in range(1, 7):
        lo, hi = big_m ** nu, big_m ** (nu + 1)
        bound = big_m ** (1 + nu / 3.0)
        mu_cap = 2 * math.sqrt(2.0) * big_m ** (1 + 2 * nu / 3.0)
        for _ in range(20):
            root = rng.uniform(0.5 * lo, 1.5 * hi)
            a = root * root
            b = rng.uniform(0.0, 0.3 * lo)
            mu = ev.resonant_set_measure(a, -2 * root, b, lo, hi, bound)
            assert mu <= mu_cap * (1 + 1e-9)


def test_shell_config_validation():
    with pytest.raises(ValueError):
        ev.ShellConfig(big_m=1.0)
    with pytest.raises(ValueError):
        ev.ShellConfig(nu_max=0)
    with pytest.raises(ValueError):
        ev.ShellConfig(split_exponent=0.5)


def test_probe_reports_shape_and_measure_bound():
    cfg = EpsMetricConfig(0.01, 1.0)
    rc = tb.RenormConditions(g=1.0, point=renorm_point(1.0))
    term = [t for t in tb.build_gamma_terms(4, 1) if t.loops][0]
    shell = ev.ShellConfig(big_m=2.0, nu_max=3, n_samples=64, seed=11)
    reports = ev.domain_split_probe(term, ev.scan_momenta(5.0, 0.7), rc, cfg,
                                    1e-3, shell)
    assert [r.nu for r in reports] == [1, 2, 3]
    prev = 0.0
    for r in reports:
        assert r.mu_measured <= r.mu_bound * (1 + 1e-9)
        assert r.partial_sum >= prev
        prev = r.partial_sum
        for field in ("d1_boundary", "d1_deriv", "d1_delta", "d2"):
            assert np.isfinite(getattr(r, field))
    reports2 = ev.domain_split_probe(term, ev.scan_momenta(5.0, 0.7), rc, cfg,
                                     1e-3, shell)
    assert reports == reports2


# --- growth diagnostics --------------------------------------------------------------

def test_growth_fit_recovers_synthetic_model():
    samples = [(a, a ** -1 * math.log(a)) for a in np.geomspace(3, 3090, 12)]
    fit = ev.growth_fit(samples, -1.0)
    assert abs(fit.exponent + 1.0) <= 1e-6
    assert fit.degree == 1
    assert fit.passed


def test_growth_fit_validates_input():
    with pytest.raises(ValueError):
        ev.growth_fit([(2.0 ** k, 1.0) for k in range(5)], 0.0)
    with pytest.raises(ValueError):
        ev.growth_fit([(a, 1 / a) for a in np.geomspace(10, 30, 12)], -1.0)


def test_predicted_exponents_for_frozen_terms():
    schan = s_channel_term()
    assert ev.predicted_growth_exponent(schan) == -1
    tad = [t for t in tb.build_gamma_terms(2, 1) if t.loops][0]
    assert ev.predicted_growth_exponent(tad) == -2
