"""Numeric side of the parametric representation.

The quadrature engine integrates the window parameters with
oscillation-aware panel orders; the two-point tail values close the
on-shell recursion; the remaining entry points are the independent
one-loop channel oracle, the threshold scan with regulator
extrapolation, the shell-decomposition prober and the growth fits.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import exp1
from scipy.stats import qmc

from . import ratexpr as rx
from .kinematics import (EpsMetricConfig, FourMomentum, ScaleWindow, eps_dot,
                         minkowski_dot, renorm_point)
from .quadform import diff_alpha_s
from .termbuilder import build_gamma_terms

__all__ = [
    "EvalRequest", "EvalResult", "ShellConfig", "ShellReport", "GrowthFit",
    "loop_constant", "evaluate_term", "vertex_value", "onshell_twopoint_value",
    "flow_derivative_onshell", "matching_constant", "bubble_oracle",
    "oracle_vertex_prediction", "scan_momenta", "continuity_scan",
    "extrapolate_eps", "domain_split_probe", "resonant_set_measure",
    "growth_fit", "predicted_growth_exponent", "pinned_integrand_value",
]


def loop_constant(cfg):
    """Gaussian constant of one four-dimensional loop integration.

    The loop measure is i d^4p / (2 pi)^4, so the oscillatory Gaussian
    integral i * Int d^4p/(2pi)^4 exp(i a p^2_eps) equals
    loop_constant / a^2; the deformed metric leaves the residual
    (1 - i*eps)^(-3/2) from the three spatial directions.  The phase
    convention is pinned by the sign of the imaginary part of the one-loop
    four-point function above threshold, cross-checked against the direct
    momentum-space oracle.
    """
    return 1.0 / (16.0 * math.pi ** 2 * (1.0 - 1j * cfg.eps) ** 1.5)


# ---------------------------------------------------------------------------
# requests and results

@dataclass(frozen=True)
class EvalRequest:
    momenta: tuple            # n-1 independent external momenta
    cfg: EpsMetricConfig
    window: ScaleWindow
    rc: object                # RenormConditions
    drop_eps_terms: bool = True
    budget: int = 2_000_000   # integrand evaluations per term


@dataclass(frozen=True)
class EvalResult:
    value: complex
    err: float
    neval: int
    exhausted: bool
    dropped: int              # terms removed by the eps-power flag


_GL_CACHE = {}


def _leggauss(n):
    got = _GL_CACHE.get(n)
    if got is None:
        got = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = got
    return got


def _dots(momenta, cfg):
    n = len(momenta)
    return [[eps_dot(momenta[k], momenta[v], cfg) for v in range(n)]
            for k in range(n)]


def _dots_real(momenta):
    n = len(momenta)
    return [[minkowski_dot(momenta[k], momenta[v]) for v in range(n)]
            for k in range(n)]


def _coeff_value(term, req):
    v = complex(float(term.coeff)) * 1j ** term.i_power
    v *= req.rc.g ** term.g_power
    v *= loop_constant(req.cfg) ** term.loops
    if term.eps_power:
        v *= req.cfg.eps ** term.eps_power
    for kind, l in term.rc_factors:
        v *= req.rc.rc_value(kind, l)
    return v


def _phase_value(term, env, dots, cfg):
    """(p,Ap)_eps + m^2 A^(m) - m^2_eps * sum of window parameters."""
    q = term.quad
    phase = cfg.mass2 * rx.evaluate(q.mass_part.total, env)
    for k in range(q.dim):
        for v in range(k, q.dim):
            e = q.entries[k][v].total
            if e.is_zero():
                continue
            w = dots[k][v] if k == v else 2.0 * dots[k][v]
            phase = phase + rx.evaluate(e, env) * w
    ssum = 0.0
    for sym in term.sum_ir:
        ssum = ssum + env[sym]
    return phase - cfg.mass2_eps * ssum


def _gamma_insertion(lf, anchors, rc, cfg):
    """On-shell two-point subfunction value at the anchoring scale.

    At one loop the tail integral has the closed form below; it is
    cross-checked against the window quadrature in the test suite.
    """
    if lf != 1:
        raise NotImplementedError("insertions above one loop")
    z = cfg.mass2_eps
    k1 = loop_constant(cfg)
    tail = np.exp(-1j * z * anchors) / anchors - 1j * z * exp1(1j * z * anchors)
    return 0.5 * rc.g * k1 * tail


def _gamma_insertion_deriv(lf, anchors, rc, cfg):
    if lf != 1:
        raise NotImplementedError("insertions above one loop")
    z = cfg.mass2_eps
    k1 = loop_constant(cfg)
    return -0.5 * rc.g * k1 * np.exp(-1j * z * anchors) / anchors ** 2


def _integrand(term, env, dots, req, modulus=False):
    cfg = req.cfg
    if modulus:
        f = np.exp(-_phase_value(term, env, dots, cfg).imag)
        f = f * np.abs(rx.evaluate(term.prefactor.total, env))
        if not term.poly.is_one():
            f = f * np.abs(term.poly.evaluate(dots, cfg.mass2, env))
        for ins in term.insertions:
            anchors = env[rx.Symbol("alpha", ins.anchor)]
            f = f * np.abs(_gamma_insertion(ins.loop_order, anchors,
                                            req.rc, cfg))
        return f
    f = np.exp(1j * _phase_value(term, env, dots, cfg))
    f = f * rx.evaluate(term.prefactor.total, env)
    if not term.poly.is_one():
        f = f * term.poly.evaluate(dots, cfg.mass2, env)
    for ins in term.insertions:
        anchors = env[rx.Symbol("alpha", ins.anchor)]
        f = f * _gamma_insertion(ins.loop_order, anchors, req.rc, cfg)
    return f


def _outer_range(term, req):
    w = req.window
    if term.theta.boundary == "above":
        lo = w.alpha
        if math.isinf(lo):
            return None
        return lo, math.inf
    lo = w.alpha0
    return lo, w.alpha


# quadrature shape parameters: max radians of phase per radial panel, node
# counts per unit phase, hard panel cap
_PANEL_PHASE = 35.0
_RADIAL_CAP = 20000


def _gauss_order(phase, base=6, slope=0.6, cap=30):
    return min(cap, base + int(math.ceil(slope * abs(phase))))


def _ladder_edges(lo, ratio=3.0):
    edges = [1.0]
    x = 1.0
    while x > lo * ratio:
        x /= ratio
        edges.append(x)
    edges.append(lo)
    return edges[::-1]


def _refine_edges(edges, locate, depth=18):
    """Insert geometrically graded edges around sign changes of ``locate``
    (the scale coefficient of the phase): the scale integral has an
    integrable logarithmic feature on that zero locus.  The top edge is
    always graded; the coefficient can vanish tangentially on the diagonal
    (equal-parameter corner), where no sign change shows."""
    hi = edges[-1]
    lo2 = edges[-2]
    graded, x = [], hi
    for _ in range(14):
        x = hi - 0.5 * (hi - lo2 if not graded else hi - graded[-1])
        if graded and hi - x < 1e-9 * (hi - lo2):
            break
        graded.append(x)
    edges = edges[:-1] + sorted(set(graded)) + [hi]
    vals = [locate(e) for e in edges]
    out = []
    for i in range(len(edges) - 1):
        out.append(edges[i])
        if vals[i] == 0.0 or vals[i] * vals[i + 1] >= 0:
            continue
        a, b, fa = edges[i], edges[i + 1], vals[i]
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = locate(m)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        z = 0.5 * (a + b)
        lo_w, hi_w = edges[i], edges[i + 1]
        left = []
        x = lo_w
        for _ in range(depth):
            x = z - 0.5 * (z - x)
            if z - x < 1e-12 * (hi_w - lo_w):
                break
            left.append(x)
        right = []
        x = hi_w
        for _ in range(depth):
            x = z + 0.5 * (x - z)
            if x - z < 1e-12 * (hi_w - lo_w):
                break
            right.append(x)
        out.extend(sorted(set(left + [z] + right)))
    out.append(edges[-1])
    return out


def _panels_from_edges(edges, order):
    xg, wg = _leggauss(order)
    xs_all, ws_all = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        xs_all.append(0.5 * (a + b) + 0.5 * (b - a) * xg)
        ws_all.append(0.5 * (b - a) * wg)
    return np.concatenate(xs_all), np.concatenate(ws_all)


def _angular_ladder(lo, order=8, ratio=3.0, locate=None, knot=None):
    """Composite Gauss panels of [lo, 1], geometrically graded toward 0.

    The grading resolves the moving-lower-limit layer: the scale interval
    empties as the direction parameter drops to its support edge, so the
    integrand turns on over many decades.  With ``locate`` the ladder is
    additionally refined around zeros of the phase's scale coefficient.
    ``knot`` pins an extra edge on the derivative kink a finite scale
    window produces (where the moving lower limit crosses the window top)."""
    edges = _ladder_edges(lo, ratio)
    if knot is not None and edges[0] < knot < edges[-1]:
        edges = sorted(set(edges) | {knot})
    if locate is not None:
        edges = _refine_edges(edges, locate)
    return _panels_from_edges(edges, max(3, order))


def _tau_axes(term, order):
    axes = []
    for k in range(term.n_tau):
        axes.append(("tau", k + 1))
    for k in range(term.n_lam):
        axes.append(("lam", k + 1))
    xg, wg = _leggauss(order)
    return axes, 0.5 + 0.5 * xg, 0.5 * wg


def _beta_env(term, ext_inner, uvals, xi):
    """Direction parameters from the per-dimension chart values.

    Chart: beta_{ext[j]} = prod_{k >= j} u_k, so the ordering constraints
    hold by construction; the Jacobian is prod_k u_k^(k-1)."""
    betas = {}
    jac = 1.0
    prod = None
    for j in range(len(ext_inner) - 1, -1, -1):
        prod = uvals[j] if prod is None else prod * uvals[j]
        betas[ext_inner[j]] = prod
    for k in range(1, len(ext_inner)):
        jac = jac * uvals[k] ** k
    return betas, jac


def _radial_slope(term, dots, cfg, xi, betas, l0):
    """Complex d(phase)/d(scale) along the direction ray, insertion phases
    included.  The phase is linear in the scale up to window-edge terms."""
    env1 = {rx.Symbol("uv", i): xi for i in range(1, term.n_uv + 1)}
    env2 = dict(env1)
    s = term.s
    for i in range(1, s):
        b = betas.get(i, 1.0)
        env1[rx.Symbol("alpha", i)] = b * l0
        env2[rx.Symbol("alpha", i)] = b * (2.0 * l0)
    env1[rx.Symbol("alpha", s)] = l0
    env2[rx.Symbol("alpha", s)] = 2.0 * l0
    for k in range(1, term.n_tau + 1):
        env1[rx.Symbol("tau", k)] = 0.5
        env2[rx.Symbol("tau", k)] = 0.5
    for k in range(1, term.n_lam + 1):
        env1[rx.Symbol("lam", k)] = 0.5
        env2[rx.Symbol("lam", k)] = 0.5
    slope = (_phase_value(term, env2, dots, cfg)
             - _phase_value(term, env1, dots, cfg)) / l0
    for ins in term.insertions:
        bf = betas.get(ins.anchor, 1.0)
        slope = slope - cfg.mass2_eps * bf
    return complex(slope)


def _radial_panels(lo, slope, o_scale, hi_cap=math.inf):
    """Panel edges and Gauss rules along the scale direction.

    Width is capped by the linear-phase budget and by the running scale
    itself (power-law prefactors need geometric resolution near the lower
    end); the tail stops once the decay rate has eaten ~50 e-folds."""
    rate = max(slope.imag, 1e-300)
    cut = min(hi_cap, lo + 50.0 / rate)
    w_osc = _PANEL_PHASE / max(abs(slope.real), 1e-300)
    xs_all, ws_all = [], []
    x = lo
    n = 0
    while x < cut and n < _RADIAL_CAP:
        w = min(w_osc, x)
        b = min(cut, x + w)
        phase = slope.real * (b - x)
        o = max(4, int(round(_gauss_order(phase) * o_scale)))
        xg, wg = _leggauss(o)
        xs_all.append(0.5 * (x + b) + 0.5 * (b - x) * xg)
        ws_all.append(0.5 * (b - x) * wg)
        x = b
        n += 1
    if not xs_all:
        return None, None
    return np.concatenate(xs_all), np.concatenate(ws_all)


def _estimate_nodes(lo, slope, o_scale, hi_cap=math.inf):
    rate = max(slope.imag, 1e-300)
    cut = min(hi_cap, lo + 50.0 / rate)
    w_osc = _PANEL_PHASE / max(abs(slope.real), 1e-300)
    geo = max(0.0, math.log2(max(cut / lo, 1.0)))
    arith = max(0.0, (cut - lo) / w_osc - 1.0) if w_osc < cut else 0.0
    o = max(4, int(round(_gauss_order(_PANEL_PHASE) * o_scale)))
    return (geo + arith) * o


def _integrate_radial(term, req, dots, o_scale, ang_orders, tau_order,
                      budget=None):
    """One pass of the radial-angular quadrature.

    Directions beta = alpha/scale are smooth (per-dimension geometric
    ladders resolve the support layer and, for one inner dimension, the
    logarithmic feature on the zero locus of the phase's scale
    coefficient); all oscillation sits in the scale integral, handled by
    linear-phase panels.  Returns (value, node count, exhausted)."""
    cfg = req.cfg
    xi = req.window.alpha0
    s = term.s
    rng = _outer_range(term, req)
    if rng is None:
        return 0j, 0, False
    out_lo, out_hi = rng
    if not out_lo < out_hi:
        return 0j, 0, False
    rate0 = cfg.eps * cfg.mass2
    if rate0 > 0:
        out_hi = min(out_hi, out_lo + 60.0 / rate0)
    lo_support = xi / out_hi

    n_tau = term.n_tau + term.n_lam
    axes, tau_x, tau_w = _tau_axes(term, tau_order)
    tau_grids = []
    if n_tau:
        mesh = np.meshgrid(*([tau_x] * n_tau), indexing="ij")
        wmesh = np.meshgrid(*([tau_w] * n_tau), indexing="ij")
        tw = np.ones_like(wmesh[0])
        for wm in wmesh:
            tw = tw * wm
        tau_grids = [m.ravel() for m in mesh]
        tau_wflat = tw.ravel()
    else:
        tau_wflat = np.array([1.0])

    exts = term.theta.linear_extensions(s)
    total = 0j
    neval = 0
    exhausted = False
    for ext in exts:
        assert ext[-1] == s
        inner = ext[:-1]
        dims = len(inner)
        locate = None
        if dims == 1:
            def locate(u, _i=inner[0]):
                return _radial_slope(term, dots, cfg, xi, {_i: u}, 1.0).real
        knot = xi / out_hi if xi / out_hi > lo_support * (1 + 1e-12) else None
        lads = [_angular_ladder(lo_support, order=ang_orders, locate=locate,
                                knot=knot)
                for _ in range(dims)]
        grids = np.meshgrid(*[l[0] for l in lads], indexing="ij")
        wgrids = np.meshgrid(*[l[1] for l in lads], indexing="ij")
        uflat = [g.ravel() for g in grids]
        wflat = np.ones_like(uflat[0]) if dims else np.array([1.0])
        for wg in wgrids:
            wflat = wflat * wg.ravel()
        n_nodes = len(wflat)

        for idx in range(n_nodes):
            uvals = [uflat[d][idx] for d in range(dims)]
            betas, jac = _beta_env(term, inner, uvals, xi)
            bmin = min(betas.values()) if betas else 1.0
            lo = max(out_lo, xi / bmin)
            if lo >= out_hi:
                continue
            slope = _radial_slope(term, dots, cfg, xi, betas, max(lo, xi))
            if slope.imag <= 0:
                slope = complex(slope.real, rate0)
            rx_nodes, rx_w = _radial_panels(lo, slope, o_scale, out_hi)
            if rx_nodes is None:
                continue
            env = {rx.Symbol("uv", i): xi for i in range(1, term.n_uv + 1)}
            radial = rx_nodes[:, None] if n_tau else rx_nodes
            env[rx.Symbol("alpha", s)] = radial
            for i, b in betas.items():
                env[rx.Symbol("alpha", i)] = b * radial
            if n_tau:
                for (kind, kidx), tg in zip(axes, tau_grids):
                    env[rx.Symbol(kind, kidx)] = tg[None, :]
            f = _integrand(term, env, dots, req)
            f = f * (radial ** (s - 1))
            if n_tau:
                f = (f * tau_wflat[None, :]).sum(axis=1)
            val = np.sum(f * rx_w) * jac * (wflat[idx] if dims else 1.0)
            total = total + val
            neval += len(rx_nodes) * max(1, len(tau_wflat))
            if budget is not None and neval > budget:
                exhausted = True
    return total, neval, exhausted


def _integrate(term, req, dots):
    cfg = req.cfg
    xi = req.window.alpha0
    s = term.s
    if req.window.unbounded and not cfg.eps > 0:
        raise ValueError("unbounded scale window needs a positive deformation")
    # projected cost at unit order scale, for the budget clamp
    betas_mid = {i: 0.5 for i in range(1, s)}
    slope_mid = _radial_slope(term, dots, cfg, xi, betas_mid, max(xi, 1.0))
    if slope_mid.imag <= 0:
        slope_mid = complex(slope_mid.real, cfg.eps * cfg.mass2)
    rng = _outer_range(term, req)
    if rng is None:
        return 0j, 0.0, 0, False
    n_ang = (1 + int(math.log(1.0 / xi) / math.log(3.0)) * 8) ** (s - 1)
    n_tau = term.n_tau + term.n_lam
    projected = (_estimate_nodes(max(rng[0], xi), slope_mid, 1.0,
                                 hi_cap=rng[1])
                 * n_ang * (10 ** n_tau)
                 * max(1, len(term.theta.linear_extensions(s))))
    o_scale = 1.0
    ang_orders = 8
    tau_order = 10
    exhausted = False
    if projected > req.budget:
        exhausted = True
        shrink = (req.budget / projected) ** (1.0 / (1 + (s - 1) + n_tau))
        o_scale = max(0.5, shrink)
        ang_orders = max(4, int(round(8 * shrink)))
        tau_order = max(5, int(round(10 * shrink)))
    else:
        # spend surplus budget on higher orders everywhere
        grow = (req.budget / max(projected, 1.0)) ** (
            1.0 / (1 + (s - 1) + n_tau))
        grow = min(grow, 4.0)
        if grow > 1.0:
            o_scale = grow
            ang_orders = min(int(round(8 * grow)), 40)
            tau_order = min(int(round(10 * grow)), 24)

    full, n1, ex1 = _integrate_radial(term, req, dots, o_scale, ang_orders,
                                      tau_order, budget=req.budget)
    half, n2, _ = _integrate_radial(term, req, dots, 0.55 * o_scale,
                                    max(3, ang_orders // 2),
                                    max(4, tau_order // 2),
                                    budget=req.budget)
    return full, abs(full - half), n1 + n2, exhausted or ex1


def evaluate_term(term, req):
    """Quadrature value of one parametric term at the request's momenta.

    Deterministic for a fixed budget; the error estimate compares against a
    half-order pass.  Terms carrying explicit deformation powers are dropped
    (and counted) unless the request keeps them.
    """
    if term.eps_power > 0 and req.drop_eps_terms:
        return EvalResult(0j, 0.0, 0, False, 1)
    base = _coeff_value(term, req)
    if base == 0:
        return EvalResult(0j, 0.0, 0, False, 0)
    dots = _dots(req.momenta, req.cfg)
    if term.s == 0:
        val = base * rx.evaluate(term.prefactor.total, {})
        if not term.poly.is_one():
            val = val * term.poly.evaluate(dots, req.cfg.mass2, {})
        return EvalResult(complex(val), 0.0, 1, False, 0)
    integral, err, neval, exhausted = _integrate(term, req, dots)
    return EvalResult(base * integral, abs(base) * err, neval, exhausted, 0)


def vertex_value(n, l, req):
    """Sum of every parametric term of the (n, l) vertex function."""
    tot = 0j
    err = 0.0
    neval = 0
    exhausted = False
    dropped = 0
    for t in build_gamma_terms(n, l):
        r = evaluate_term(t, req)
        tot += r.value
        err += r.err
        neval += r.neval
        exhausted = exhausted or r.exhausted
        dropped += r.dropped
    return EvalResult(tot, err, neval, exhausted, dropped)


# ---------------------------------------------------------------------------
# on-shell two-point values

def onshell_twopoint_value(l, alpha_anchor, rc, cfg, xi, n_panels=64):
    """Two-point function on the mass shell at window top ``alpha_anchor``.

    Equals minus the tail of the on-shell flow derivative; off-shell parts
    vanish exactly on the shell because their momentum monomial does.
    """
    if math.isinf(alpha_anchor):
        return 0j
    mom = (FourMomentum(cfg.mass, 0.0, 0.0, 0.0),)
    req = EvalRequest(momenta=mom, cfg=cfg,
                      window=ScaleWindow(xi, alpha_anchor), rc=rc,
                      budget=4000 * n_panels)
    tot = 0j
    for t in build_gamma_terms(2, l):
        tot += evaluate_term(t, req).value
    return tot


def _local_phase_panels(lo, hi, slope_fn, o_scale=1.0, modulus=False):
    """Composite Gauss rule on [lo, hi] with width set by the local phase
    slope; resolves saturating phases where a single global slope fails.
    In modulus mode only the decay rate matters (no oscillation), so the
    budget is a few e-folds per panel instead."""
    xs_all, ws_all = [], []
    x = lo
    n = 0
    while x < hi and n < _RADIAL_CAP:
        sl = slope_fn(x)
        if modulus:
            w = min(8.0 / max(abs(sl.imag), 1e-300), x)
            o = 10
        else:
            w = min(_PANEL_PHASE / max(abs(sl), 1e-300), x)
            o = _gauss_order(abs(sl) * (min(hi, x + w) - x))
        b = min(hi, x + w)
        o = max(4, int(round(o * o_scale)))
        xg, wg = _leggauss(o)
        xs_all.append(0.5 * (x + b) + 0.5 * (b - x) * xg)
        ws_all.append(0.5 * (b - x) * wg)
        x = b
        n += 1
    if not xs_all:
        return None, None
    return np.concatenate(xs_all), np.concatenate(ws_all)


def pinned_integrand_value(term, req, alpha_top, modulus=False):
    """Inner-integrated integrand of a term at a fixed top scale.

    All inner window parameters are integrated with the top pinned at
    ``alpha_top``; the rational coefficient, the loop constants and the
    renormalization factors are included.  Used by the flow-derivative
    evaluation, the growth audit and the shell prober's cross-checks.

    Same chart as the full integral: directions are smooth, the largest
    inner parameter carries the oscillation.  Its phase saturates as it
    approaches the pinned top, so panel widths track the local slope.

    With ``modulus`` the integrand is replaced by its absolute value,
    which is what the scale power counting bounds sharply; oscillatory
    values can only decay faster.
    """
    cfg = req.cfg
    xi = req.window.alpha0
    base = _coeff_value(term, req)
    if modulus:
        base = abs(base)
    dots = _dots(req.momenta, cfg)
    s = term.s
    if s == 0:
        raise ValueError("term has no window parameters")
    t_top = float(alpha_top)
    n_tau = term.n_tau + term.n_lam
    axes, tau_x, tau_w = _tau_axes(term, 12)
    if n_tau:
        mesh = np.meshgrid(*([tau_x] * n_tau), indexing="ij")
        wmesh = np.meshgrid(*([tau_w] * n_tau), indexing="ij")
        tw = np.ones_like(wmesh[0])
        for wm in wmesh:
            tw = tw * wm
        tau_grids = [m.ravel() for m in mesh]
        tau_wflat = tw.ravel()
    else:
        tau_grids = []
        tau_wflat = np.array([1.0])

    uv_env = {rx.Symbol("uv", i): xi for i in range(1, term.n_uv + 1)}
    m2e = cfg.mass2_eps

    def phase_at(betas, rad_idx, r):
        env = dict(uv_env)
        env[rx.Symbol("alpha", s)] = t_top
        env[rx.Symbol("alpha", rad_idx)] = r
        for i, b in betas.items():
            env[rx.Symbol("alpha", i)] = b * r
        for k in range(1, term.n_tau + 1):
            env[rx.Symbol("tau", k)] = 0.5
        for k in range(1, term.n_lam + 1):
            env[rx.Symbol("lam", k)] = 0.5
        ph = _phase_value(term, env, dots, cfg)
        for ins in term.insertions:
            if ins.anchor == s:
                continue
            bf = 1.0 if ins.anchor == rad_idx else betas.get(ins.anchor, 1.0)
            ph = ph - m2e * bf * r
        return ph

    total = 0j
    for ext in term.theta.linear_extensions(s):
        assert ext[-1] == s
        inner = ext[:-1]
        if not inner:
            env = dict(uv_env)
            env[rx.Symbol("alpha", s)] = np.array([t_top])
            if n_tau:
                for (kind, kidx), tg in zip(axes, tau_grids):
                    env[rx.Symbol(kind, kidx)] = tg
                env[rx.Symbol("alpha", s)] = np.full_like(tau_grids[0],
                                                          t_top)
            f = _integrand(term, env, dots, req, modulus)
            total = total + np.sum(f * tau_wflat)
            continue
        rad_idx = inner[-1]
        ang_idx = inner[:-1]
        dims = len(ang_idx)
        lo_support = xi / t_top
        if dims:
            lads = [_angular_ladder(lo_support, order=6)
                    for _ in range(dims)]
            grids = np.meshgrid(*[l[0] for l in lads], indexing="ij")
            wgrids = np.meshgrid(*[l[1] for l in lads], indexing="ij")
            uflat = [g.ravel() for g in grids]
            wflat = np.ones_like(uflat[0])
            for wg in wgrids:
                wflat = wflat * wg.ravel()
            n_nodes = len(wflat)
        else:
            uflat, wflat, n_nodes = [], np.array([1.0]), 1

        for idx in range(n_nodes):
            uvals = [uflat[d][idx] for d in range(dims)]
            betas, jac = _beta_env(term, ang_idx, uvals, xi)
            bmin = min(betas.values()) if betas else 1.0
            lo = max(xi, xi / bmin)
            if lo >= t_top:
                continue

            def slope_fn(x, _b=betas, _r=rad_idx):
                h = 1e-3 * x
                return (phase_at(_b, _r, x + h) - phase_at(_b, _r, x)) / h

            r_nodes, r_w = _local_phase_panels(lo, t_top, slope_fn,
                                               modulus=modulus)
            if r_nodes is None:
                continue
            env = dict(uv_env)
            radial = r_nodes[:, None] if n_tau else r_nodes
            env[rx.Symbol("alpha", s)] = t_top
            env[rx.Symbol("alpha", rad_idx)] = radial
            for i, b in betas.items():
                env[rx.Symbol("alpha", i)] = b * radial
            if n_tau:
                for (kind, kidx), tg in zip(axes, tau_grids):
                    env[rx.Symbol(kind, kidx)] = tg[None, :]
            f = _integrand(term, env, dots, req, modulus)
            f = f * (radial ** dims)
            if n_tau:
                f = (f * tau_wflat[None, :]).sum(axis=1)
            total = total + np.sum(f * r_w) * jac * (wflat[idx] if dims
                                                     else 1.0)
    return base * total


def flow_derivative_onshell(l, alpha_s, rc, cfg, xi):
    """d/d(alpha) of the on-shell two-point function at the given scale."""
    mom = (FourMomentum(cfg.mass, 0.0, 0.0, 0.0),)
    req = EvalRequest(momenta=mom, cfg=cfg, window=ScaleWindow(xi, alpha_s),
                      rc=rc)
    tot = 0j
    for t in build_gamma_terms(2, l):
        if t.theta.boundary != "above":
            continue
        tot -= pinned_integrand_value(t, req, alpha_s)
    return tot


# ---------------------------------------------------------------------------
# independent one-loop oracle

def _adaptive_panel(f, a, b, tol, depth):
    x15, w15 = _leggauss(15)
    x7, w7 = _leggauss(7)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    v15 = half * np.sum(w15 * f(mid + half * x15))
    v7 = half * np.sum(w7 * f(mid + half * x7))
    if abs(v15 - v7) < tol or depth >= 12:
        return v15
    return (_adaptive_panel(f, a, mid, 0.5 * tol, depth + 1)
            + _adaptive_panel(f, mid, b, 0.5 * tol, depth + 1))


def bubble_oracle(s, m, eps):
    """Single-channel one-loop value by direct parameter integration.

    Independent of the parametric pipeline: the channel amplitude per g^2,
    subtracted at zero momentum, is the deformed-metric one-loop integral
      -(32 pi^2 (1-i eps)^{3/2})^{-1} * Int_0^1 dx log[(m^2_eps - x(1-x)s)/m^2_eps].
    The deformed mass keeps the logarithm off its cut for every real s.
    """
    m2e = (1.0 - 1j * eps) * m * m
    c = -1.0 / (32.0 * math.pi ** 2 * (1.0 - 1j * eps) ** 1.5)

    def f(x):
        return np.log((m2e - x * (1.0 - x) * s) / m2e)

    val = _adaptive_panel(f, 0.0, 1.0, 1e-12, 0)
    return c * val


def _channel_invariants(momenta):
    p1, p2, p3 = momenta
    return (minkowski_dot(p1 + p2, p1 + p2),
            minkowski_dot(p1 + p3, p1 + p3),
            minkowski_dot(p2 + p3, p2 + p3))


def oracle_vertex_prediction(momenta, rc, cfg):
    """Renormalization-matched one-loop four-point prediction.

    Sum of subtracted channel bubbles, anchored to vanish at the
    renormalization-point momenta; to be compared against the parametric
    value with the matched boundary constant.
    """
    point = rc.point or renorm_point(cfg.mass)
    ref = _channel_invariants(point[:3])
    inv = _channel_invariants(momenta)
    g2 = rc.g ** 2
    return g2 * sum(bubble_oracle(si, cfg.mass, cfg.eps)
                    - bubble_oracle(ri, cfg.mass, cfg.eps)
                    for si, ri in zip(inv, ref))


def matching_constant(cfg, rc, xi, budget=600_000):
    """Boundary four-point constant that makes the full-flow one-loop
    four-point function vanish at the renormalization point."""
    point = rc.point or renorm_point(cfg.mass)
    req = EvalRequest(momenta=point[:3], cfg=cfg,
                      window=ScaleWindow(xi, math.inf),
                      rc=replace(rc, c1=0.0), budget=budget)
    tot = 0j
    for t in build_gamma_terms(4, 1):
        tot += evaluate_term(t, req).value
    return -tot


# ---------------------------------------------------------------------------
# threshold scan

def scan_momenta(s_mandelstam, k0):
    """Momentum path of the scan: the timelike channel invariant is exactly
    s; the two spacelike invariants stay fixed at -2 k0^2."""
    e = 0.5 * math.sqrt(s_mandelstam)
    return (FourMomentum(e, 0.0, 0.0, k0),
            FourMomentum(e, 0.0, 0.0, -k0),
            FourMomentum(-e, k0, 0.0, 0.0))


def extrapolate_eps(eps_list, values):
    """Regulator-removal estimate: quadratic fit in sqrt(eps) at zero, plus
    a drift estimate from the linear fit through the two smallest values.

    The sqrt basis is required: the threshold-anchored matching constant
    carries a sqrt(eps) term (the channel zero at the anchor is a double
    zero), so a fit polynomial in eps converges only like sqrt(eps_min).
    """
    if len(eps_list) < 3:
        return None, None
    t = [math.sqrt(e) for e in eps_list][-3:]
    v = list(values)[-3:]
    quad = 0j
    for i in range(3):
        li = 1.0
        for j in range(3):
            if j != i:
                li *= t[j] / (t[j] - t[i])
        quad += v[i] * li
    lin = v[-1] - t[-1] * (v[-1] - v[-2]) / (t[-1] - t[-2])
    return quad, abs(quad - lin)


class _ScanTask:
    """Picklable per-invariant scan task, usable from a process pool."""

    def __init__(self, eps_list, rcs, mass, xi, k0, budget):
        self.eps_list = eps_list
        self.rcs = rcs
        self.mass = mass
        self.xi = xi
        self.k0 = k0
        self.budget = budget

    def __call__(self, s):
        vals, errs = [], []
        for eps in self.eps_list:
            cfg = EpsMetricConfig(eps, self.mass)
            req = EvalRequest(momenta=scan_momenta(s, self.k0), cfg=cfg,
                              window=ScaleWindow(self.xi, math.inf),
                              rc=self.rcs[eps], budget=self.budget)
            r = vertex_value(4, 1, req)
            vals.append(r.value)
            errs.append(r.err)
        extr, drift = extrapolate_eps(self.eps_list, vals)
        rows = []
        for eps, v, q in zip(self.eps_list, vals, errs):
            err = q if extr is None else max(q, drift)
            rows.append({
                "s": s, "eps": eps, "re": v.real, "im": v.imag,
                "err_est": err,
                "extrapolated_re": None if extr is None else extr.real,
                "extrapolated_im": None if extr is None else extr.imag,
            })
        return rows


def continuity_scan(s_values, eps_list, rc, mass, xi, k0=None,
                    budget=2_000_000, workers=1, auto_match=True):
    """Evaluate the one-loop four-point function along the scan path.

    Returns one row dict per (s, eps) pair carrying the value, the
    quadrature error estimate and the shared extrapolated columns; the
    boundary constant is re-matched at every regulator value unless
    auto_match is off.
    """
    eps_list = tuple(eps_list)
    if any(e <= 0 for e in eps_list):
        raise ValueError("regulator values must be positive")
    if list(eps_list) != sorted(eps_list, reverse=True):
        raise ValueError("regulator list must decrease")
    if k0 is None:
        k0 = 0.7 * mass

    rcs = {}
    for eps in eps_list:
        cfg = EpsMetricConfig(eps, mass)
        c1 = matching_constant(cfg, rc, xi, budget) if auto_match else rc.c1
        rcs[eps] = replace(rc, c1=c1)

    task = _ScanTask(eps_list, rcs, mass, xi, k0, budget)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(task, s_values))
    else:
        chunks = [task(s) for s in s_values]
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------------------
# shell-decomposition prober

@dataclass(frozen=True)
class ShellConfig:
    big_m: float = 2.0
    nu_max: int = 8
    n_samples: int = 256
    seed: int = 11
    split_exponent: float = 2.0 / 3.0
    include_spectators: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.big_m > 1.0:
            raise ValueError("shell base must exceed 1")
        if self.nu_max < 1 or self.n_samples < 8:
            raise ValueError("too few shells or samples")
        if abs(self.split_exponent - 2.0 / 3.0) > 1e-12:
            raise ValueError("domain split exponent is fixed at 2/3")


@dataclass(frozen=True)
class ShellReport:
    nu: int
    d1_boundary: float
    d1_deriv: float
    d1_delta: float
    d2: float
    mu_measured: float
    mu_bound: float
    partial_sum: float
    total: float
    n_d1: int
    n_d2: int
    a_negative: int


def resonant_set_measure(a, dprime, b, window_lo, window_hi, bound):
    """Length of {x in [window_lo+b, window_hi+b] : |a/x + x + dprime| <= bound}.

    The set is the pair-of-intervals region between the two parabolas
    x^2 + (dprime -+ bound) x + a; the inner interval is always contained
    in the outer one, so the length is a difference of clipped lengths.
    """
    lo, hi = window_lo + b, window_hi + b

    def clipped(shift, strict):
        disc = (dprime + shift) ** 2 - 4.0 * a
        if disc <= 0:
            return 0.0
        r = math.sqrt(disc)
        x1 = 0.5 * (-(dprime + shift) - r)
        x2 = 0.5 * (-(dprime + shift) + r)
        return max(0.0, min(hi, x2) - max(lo, x1))

    return max(0.0, clipped(-bound, False) - clipped(+bound, True))


class _BetaBoard:
    """Vectorized evaluation of the rescaled integrand and its scale
    derivative at fixed direction parameters beta = alpha / alpha_s."""

    def __init__(self, term, momenta, rc, cfg, xi, include_spectators):
        s = term.s
        if s < 2:
            raise ValueError("prober needs at least one inner parameter")
        if term.n_tau or term.n_lam:
            raise ValueError("interpolation parameters are outside the "
                             "prober's rescaled form")
        a_s = rx.Symbol("alpha", s)
        if a_s in rx.free_symbols(term.quad.mass_part.total):
            raise ValueError("mass block depends on the top scale")
        if term.trace is None:
            raise ValueError("term carries no reduction shorthands")
        self.term = term
        self.rc = rc
        self.cfg = cfg
        self.xi = xi
        self.spectators = include_spectators
        self.dots = _dots(momenta, cfg)
        self.dots0 = _dots_real(momenta)
        self.subst = {rx.Symbol("alpha", i):
                      rx.mul(rx.lam(i), rx.symbol("alpha", s))
                      for i in range(1, s)}
        self.q_sub = rx.subst(term.prefactor.total, self.subst)
        self.dq_sub = diff_alpha_s(self.q_sub, s)
        self.entries = []
        for k in range(term.quad.dim):
            for v in range(k, term.quad.dim):
                e = term.quad.entries[k][v]
                if e.total.op == "num" and e.total.num == 0:
                    continue
                w = 1.0 if k == v else 2.0
                tot = rx.subst(e.total, self.subst)
                self.entries.append((k, v, w, e, tot, diff_alpha_s(tot, s)))
        self.mass_sub = rx.subst(term.quad.mass_part.total, self.subst)
        self.dmass_sub = diff_alpha_s(self.mass_sub, s)
        # multiplicity of the scale inside the window-parameter sum
        self.n_alpha_s = sum(1 for y in term.sum_ir if y == a_s)
        self.ir_inner = [y for y in term.sum_ir
                         if y.kind == "alpha" and y != a_s]
        self.ir_uv = sum(xi for y in term.sum_ir if y.kind == "uv")
        self.poly_const = (1.0 if term.poly.is_one() else
                           term.poly.evaluate(self.dots, cfg.mass2, {}))

    def _lam_env(self, betas, alpha_s):
        env = {rx.Symbol("lam", i): betas[:, i - 1, None]
               for i in range(1, self.term.s)}
        env[rx.Symbol("alpha", self.term.s)] = alpha_s
        for i in range(1, self.term.n_uv + 1):
            env[rx.Symbol("uv", i)] = self.xi
        return env

    def phase0(self, betas):
        """Exact scale coefficient of the phase at eps = 0 (real)."""
        env = {rx.Symbol("alpha", i): betas[:, i - 1]
               for i in range(1, self.term.s)}
        env[rx.Symbol("alpha", self.term.s)] = np.ones(len(betas))
        val = np.zeros(len(betas))
        for k, v, w, e, _, _ in self.entries:
            val = val + w * self.dots0[k][v] * rx.evaluate(e.part0, env)
        m0 = rx.evaluate(self.term.quad.mass_part.part0, env)
        val = val + self.cfg.mass2 * m0
        beta_sum = np.ones(len(betas)) * self.n_alpha_s
        for y in self.ir_inner:
            beta_sum = beta_sum + env[y]
        return val - self.cfg.mass2 * beta_sum

    def modulus(self, betas, alpha_s):
        """|G|(beta, alpha_s) with the oscillating scale factor removed."""
        g, _ = self._value_and_log_deriv(betas, alpha_s, want_deriv=False)
        return np.abs(g)

    def deriv_modulus(self, betas, alpha_s):
        g, dlog = self._value_and_log_deriv(betas, alpha_s, want_deriv=True)
        return np.abs(g * dlog)

    def _value_and_log_deriv(self, betas, alpha_s, want_deriv):
        term, cfg = self.term, self.cfg
        s = term.s
        env = self._lam_env(betas, alpha_s)
        phi0 = self.phase0(betas)[:, None]
        phase = cfg.mass2 * rx.evaluate(self.mass_sub, env)
        dphase = cfg.mass2 * rx.evaluate(self.dmass_sub, env) \
            if want_deriv else 0.0
        for k, v, w, _, tot, dtot in self.entries:
            phase = phase + w * self.dots[k][v] * rx.evaluate(tot, env)
            if want_deriv:
                dphase = dphase + w * self.dots[k][v] * rx.evaluate(dtot, env)
        beta_sum = np.full((len(betas), 1), float(self.n_alpha_s))
        for y in self.ir_inner:
            beta_sum = beta_sum + betas[:, y.index - 1, None]
        phase = phase - cfg.mass2_eps * (beta_sum * alpha_s + self.ir_uv)
        if want_deriv:
            dphase = dphase - cfg.mass2_eps * beta_sum
        spectator = phase - phi0 * alpha_s

        q = rx.evaluate(self.q_sub, env)
        g = alpha_s ** (s - 1) * q * self.poly_const
        if self.spectators:
            g = g * np.exp(1j * spectator)
        dlog = 0.0
        if want_deriv:
            dlog = (s - 1) / alpha_s + rx.evaluate(self.dq_sub, env) / q
            if self.spectators:
                dlog = dlog + 1j * (dphase - phi0)
        for ins in term.insertions:
            bf = (np.ones((len(betas), 1)) if ins.anchor == s
                  else betas[:, ins.anchor - 1, None])
            anchors = bf * alpha_s
            gv = _gamma_insertion(ins.loop_order, anchors, self.rc, cfg)
            g = g * gv
            if want_deriv:
                dlog = dlog + bf * _gamma_insertion_deriv(
                    ins.loop_order, anchors, self.rc, cfg) / gv
        return g, dlog


def _trace_constants(board, betas, alpha_ref):
    """Per-sample (a, b, dprime) of the scale dependence at frozen inner
    parameters alpha' = beta * alpha_ref, in units of the squared mass."""
    term = board.term
    trace = term.trace
    m2 = board.cfg.mass2
    env = {rx.Symbol("alpha", i): betas[:, i - 1] * alpha_ref
           for i in range(1, term.s)}
    for i in range(1, term.n_uv + 1):
        env[rx.Symbol("uv", i)] = board.xi
    b = rx.evaluate(trace.f.total, env) + np.zeros(len(betas))
    dvals = [rx.evaluate(d.total, env) + np.zeros(len(betas))
             for d in trace.d]
    pd2 = np.zeros(len(betas))
    ext_val = np.zeros(len(betas))
    dim = trace.ext.dim
    for k in range(dim):
        for v in range(dim):
            pd2 = pd2 + dvals[k] * dvals[v] * board.dots0[k][v]
            e = trace.ext.entries[k][v].total
            if not (e.op == "num" and e.num == 0):
                ext_val = ext_val + rx.evaluate(e, env) * board.dots0[k][v]
    mass0 = rx.evaluate(term.quad.mass_part.total, env) + np.zeros(len(betas))
    ir = np.zeros(len(betas)) + board.ir_uv
    for y in board.ir_inner:
        ir = ir + env[y]
    a = pd2 / m2
    dprime = -ext_val / m2 - mass0 + ir - b
    return a, b, dprime


def domain_split_probe(term, momenta, rc, cfg, xi, shell):
    """Shell-by-shell account of the large-scale decay mechanisms.

    Per shell the direction samples are split by the size of the exact
    scale coefficient of the phase; on the non-resonant part the three
    partial-integration pieces (boundary, scale derivative, moving lower
    limit) are measured as modulus boards, on the resonant part the measure
    of the slow-phase scale set is computed from the quadratic-root formula
    and multiplied by the board supremum.  Quasi-random sampling with a
    fixed seed keeps reruns identical.
    """
    shell.validate()
    board = _BetaBoard(term, momenta, rc, cfg, xi, shell.include_spectators)
    s = term.s
    n_inner = s - 1
    eng = qmc.Sobol(d=n_inner + 1, scramble=True, seed=shell.seed)
    pts = eng.random(shell.n_samples)
    betas = pts[:, :n_inner]
    tpos = pts[:, n_inner]

    inner_orders = [(lo, hi) for lo, hi in term.theta.orderings
                    if hi != s and lo != s]
    order_ok = np.ones(len(betas), dtype=bool)
    for lo, hi in inner_orders:
        order_ok &= betas[:, lo - 1] <= betas[:, hi - 1]

    big_m = shell.big_m
    sup_grid = np.geomspace(1.0, big_m, 9)
    reports = []
    partial = 0.0
    for nu in range(1, shell.nu_max + 1):
        lo_a, hi_a = big_m ** nu, big_m ** (nu + 1)
        delta = big_m ** (-shell.split_exponent * nu)
        kbound = big_m ** (1.0 + nu / 3.0)
        mu_bound = 2.0 * math.sqrt(2.0) * big_m ** (1.0 + 2.0 * nu / 3.0)
        a_mid = lo_a + (hi_a - lo_a) * tpos

        phi0 = board.phase0(betas)
        in_d1 = (np.abs(phi0) >= delta) & order_ok
        in_d2 = (np.abs(phi0) < delta) & order_ok
        feas_lo = (betas >= xi / lo_a).all(axis=1)
        feas_mid = (betas >= (xi / a_mid)[:, None]).all(axis=1)
        feas_hi = (betas >= xi / hi_a).all(axis=1)

        # D1 boundary: the two shell edges
        d1b = 0.0
        for edge, feas in ((lo_a, feas_lo), (hi_a, feas_hi)):
            sel = in_d1 & feas
            if sel.any():
                mods = board.modulus(betas[sel], edge)
                d1b += float(np.sum(mods[:, 0] / np.abs(phi0[sel])))
        d1b /= len(betas)

        # D1 scale-derivative piece over the shell
        sel = in_d1 & feas_mid
        d1d = 0.0
        if sel.any():
            dm = board.deriv_modulus(betas[sel], a_mid[sel][:, None])
            d1d = float(np.sum(dm[:, 0] / np.abs(phi0[sel]))) / len(betas)
            d1d *= (hi_a - lo_a)

        # D1 moving-lower-limit piece: facets beta_i = xi / alpha_s
        d1l = 0.0
        for i in range(n_inner):
            bmod = betas.copy()
            bmod[:, i] = xi / a_mid
            ok = np.ones(len(bmod), dtype=bool)
            for lo, hi in inner_orders:
                ok &= bmod[:, lo - 1] <= bmod[:, hi - 1]
            ok &= (bmod >= (xi / a_mid)[:, None] - 1e-15).all(axis=1)
            phi0m = board.phase0(bmod)
            selm = (np.abs(phi0m) >= delta) & ok
            if not selm.any():
                continue
            mods = board.modulus(bmod[selm], a_mid[selm][:, None])
            vals = (xi / a_mid[selm] ** 2) * mods[:, 0] / np.abs(phi0m[selm])
            d1l += float(np.sum(vals)) / len(betas) * (hi_a - lo_a)

        # D2: measure of the slow-phase scale set times the board supremum
        d2 = 0.0
        mu_max = 0.0
        a_neg = 0
        sel = in_d2 & feas_lo
        if sel.any():
            a_c, b_c, dp_c = _trace_constants(board, betas[sel], lo_a)
            sups = board.modulus(betas[sel], lo_a * sup_grid[None, :])
            sups = sups.max(axis=1)
            mus = np.array([
                resonant_set_measure(ai, di, bi, lo_a, hi_a, kbound)
                for ai, di, bi in zip(a_c, dp_c, b_c)])
            a_neg = int(np.sum(a_c < 0))
            mu_max = float(mus.max()) if len(mus) else 0.0
            d2 = float(np.sum(mus * sups)) / len(betas)

        total = d1b + d1d + d1l + d2
        partial += total
        reports.append(ShellReport(
            nu=nu, d1_boundary=d1b, d1_deriv=d1d, d1_delta=d1l, d2=d2,
            mu_measured=mu_max, mu_bound=mu_bound, partial_sum=partial,
            total=total, n_d1=int(np.sum(in_d1)), n_d2=int(np.sum(in_d2)),
            a_negative=a_neg))
    return reports


# ---------------------------------------------------------------------------
# growth fits

@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    degree: int
    residual: float
    passed: bool


def growth_fit(samples, expected_exponent=None, max_log_degree=2,
               log_scale=1.0):
    """Fit log|value| = e log a + d log log(a/log_scale) + c over (a, value)
    samples.

    Requires at least 10 samples spanning three decades with a/log_scale > e
    so the iterated logarithm is defined.  Logarithmic corrections come as
    powers of log(scale/window bottom), hence ``log_scale`` is normally the
    window bottom.  The degree minimizing the residual is reported; the pass
    flag compares e against the expected exponent as an upper bound."""
    pts = sorted((float(a), abs(v)) for a, v in samples if abs(v) > 0)
    if len(pts) < 10:
        raise ValueError("insufficient dynamic range: need 10 samples")
    a = np.array([p[0] for p in pts])
    if a[0] / log_scale <= math.e:
        raise ValueError("growth samples must start above e")
    if a[-1] / a[0] < 1e3:
        raise ValueError("insufficient dynamic range: need three decades")
    y = np.log(np.array([p[1] for p in pts]))
    la = np.log(a)
    lla = np.log(np.log(a / log_scale))
    best = None
    for d in range(max_log_degree + 1):
        design = np.stack([la, np.ones_like(la)], axis=1)
        rhs = y - d * lla
        sol, res, _, _ = np.linalg.lstsq(design, rhs, rcond=None)
        resid = float(np.sqrt(np.mean((design @ sol - rhs) ** 2)))
        if best is None or resid < best[2] - 1e-12:
            best = (float(sol[0]), d, resid)
    e, d, resid = best
    passed = True
    if expected_exponent is not None:
        passed = e <= expected_exponent + 0.1
    return GrowthFit(e, d, resid, passed)


def predicted_growth_exponent(term):
    """Scale exponent of the inner-integrated modulus from power counting:
    inner measure, rational prefactor degree, insertion decay.  A one-loop
    insertion falls off two powers: the leading term of its tail integral
    cancels between the boundary value and the exponential-integral part,
    as the large-argument expansion shows."""
    return (term.s - 1) + term.prefactor.degree - 2 * len(term.insertions)
