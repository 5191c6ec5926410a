"""Construction of the parametric terms of the vertex functions.

Each flow step writes the derivative of the 2l-order n-point function as a
momentum integral over chains of lower-order vertex functions joined by
propagator lines, with the two loop legs pinned to the chain ends.  Chains
are expanded into explicit assignments of external legs to chain factors;
every assignment contributes one Gaussian momentum integral, done in closed
form by gauss_reduce.  The result of build_gamma_terms is a merged, canonically
ordered list of ParametricTerm records: everything needed to evaluate the
vertex function numerically or to inspect its large-parameter structure.

Index conventions for a term with s flow parameters: symbols alpha_1 ..
alpha_s, where alpha_s is the outermost scale (the one the flow integral
runs over); uv symbols sit at the lower window edge; tau symbols are
interpolation variables on [0, 1].  External momenta occupy n-1 slots,
the implied n-th leg carrying minus their sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import ratexpr as rx
from .quadform import (
    QuadForm, ReductionTrace, gauss_reduce, qf_add, qf_line, qf_map_momenta,
    qf_zero,
)
from .ratexpr import (
    ONE, SplitExpr, ZERO, rat, s_add, s_alpha_line, s_mul, s_scale, s_uv_line,
    s_zero,
)


@dataclass(frozen=True)
class ThetaConstraints:
    """Ordering constraints on the flow parameters.

    orderings is a set of (lo, hi) index pairs meaning alpha_lo <= alpha_hi;
    boundary says where the outermost parameter lives relative to the window
    top: "below" (it is integrated up to the top) or "above" (from the top
    to infinity); "none" for parameter-free terms.
    """

    orderings: frozenset
    boundary: str

    def __post_init__(self):
        assert self.boundary in ("below", "above", "none")

    def linear_extensions(self, s):
        """All total orders of 1..s compatible with the constraints."""
        succ = {}
        pred_count = {i: 0 for i in range(1, s + 1)}
        for lo, hi in self.orderings:
            succ.setdefault(lo, []).append(hi)
            pred_count[hi] += 1
        out = []
        order = []

        def backtrack(remaining):
            if not remaining:
                out.append(tuple(order))
                return
            for v in sorted(remaining):
                if pred_count[v] == 0:
                    remaining.remove(v)
                    order.append(v)
                    for w in succ.get(v, ()):
                        pred_count[w] -= 1
                    backtrack(remaining)
                    for w in succ.get(v, ()):
                        pred_count[w] += 1
                    order.pop()
                    remaining.add(v)

        backtrack(set(range(1, s + 1)))
        return out


@dataclass(frozen=True)
class TwoPointInsertion:
    """An on-shell two-point subfunction riding along at the given scale."""

    loop_order: int
    anchor: int  # alpha index whose value is the insertion's window top


@dataclass(frozen=True)
class MomentumPoly:
    """Polynomial in the deformed dot products and m^2.

    items: tuple of (pairs, m2pow, coeff) where pairs is a sorted tuple of
    (i, j) slot index pairs (a factor dot(p_i, p_j) each) and coeff an Expr.
    """

    items: tuple

    def is_one(self):
        return self.items == (((), 0, ONE),)

    def p_dependent(self):
        return any(pairs for pairs, _, _ in self.items)

    def evaluate(self, dots, m2, env):
        total = 0
        for pairs, m2pow, coeff in self.items:
            v = rx.evaluate(coeff, env)
            for (i, j) in pairs:
                v = v * dots[i][j]
            total = total + v * (m2 ** m2pow)
        return total


POLY_ONE = MomentumPoly((((), 0, ONE),))


def poly_onshell_factor(slot=0):
    """(p^2_eps - m^2) attached at the given momentum slot."""
    return MomentumPoly(((((slot, slot),), 0, ONE), ((), 1, rat(-1))))


@dataclass(frozen=True)
class RenormConditions:
    """Coupling and the boundary constants of the two- and four-point
    functions at the lower window edge, by loop order.

    point is the momentum configuration at which the four-point constants
    are prescribed; empty selects the at-rest threshold configuration for
    the mass in use (kinematics.renorm_point).  The matched constants come
    out complex for positive metric deformation.
    """

    g: float = 1.0
    b1: float = 0.0
    b2: float = 0.0
    c1: complex = 0.0
    c2: complex = 0.0
    point: tuple = ()

    def rc_value(self, kind, l):
        return {("b", 1): self.b1, ("b", 2): self.b2,
                ("c", 1): self.c1, ("c", 2): self.c2}[(kind, l)]


@dataclass(frozen=True)
class ParametricTerm:
    n_external: int
    loop_order: int
    coeff: Fraction
    i_power: int        # power of the imaginary unit (mod 4)
    g_power: int
    loops: int          # number of closed momentum integrations performed
    s: int              # number of flow parameters; alpha_s has index s
    n_uv: int
    n_tau: int
    n_lam: int
    theta: ThetaConstraints
    quad: QuadForm      # over n_external - 1 momentum slots
    prefactor: SplitExpr
    poly: MomentumPoly
    sum_ir: tuple       # symbols multiplying -m^2_eps in the phase
    insertions: tuple
    eps_power: int
    rc_factors: tuple   # renormalization-constant markers ("b"|"c", l)
    origins: tuple
    trace: object = field(default=None, compare=False)

    def canonical_key(self):
        return (
            self.n_external, self.loop_order, self.i_power % 4, self.g_power,
            self.loops, self.s, self.n_uv, self.n_tau, self.n_lam,
            tuple(sorted(self.theta.orderings)), self.theta.boundary,
            tuple(tuple(_skey(e) for e in row) for row in self.quad.entries),
            _skey(self.quad.mass_part),
            _skey(self.prefactor),
            tuple((pairs, m2pow, c.key) for pairs, m2pow, c in self.poly.items),
            tuple((sym.kind, sym.index) for sym in self.sum_ir),
            tuple((ins.loop_order, ins.anchor) for ins in self.insertions),
            self.eps_power, tuple(self.rc_factors),
        )


def _skey(se):
    return (se.total.key, se.part0.key, se.part1.key, se.degree)


@dataclass(frozen=True)
class _OnShellInsertion:
    loop_order: int


def _leg_row(i, n, dim):
    """Momentum row of external leg i (1-based) over the big slot basis."""
    row = [Fraction(0)] * dim
    if i <= n - 1:
        row[i - 1] = Fraction(1)
    else:
        assert i == n
        for j in range(n - 1):
            row[j] = Fraction(-1)
    return row


def _neg(row):
    return [-c for c in row]


def _row_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _rename_split(se, mapping):
    return SplitExpr(rx.subst(se.total, mapping), rx.subst(se.part0, mapping),
                     rx.subst(se.part1, mapping), se.degree)


def _rename_quad(q, mapping):
    entries = tuple(
        tuple(_rename_split(e, mapping) for e in row) for row in q.entries
    )
    return QuadForm(q.dim, entries, _rename_split(q.mass_part, mapping))


def _shift_maps(t, off_a, off_u, off_t, off_l):
    m = {}
    for i in range(1, t.s + 1):
        m[rx.Symbol("alpha", i)] = rx.symbol("alpha", i + off_a)
    for i in range(1, t.n_uv + 1):
        m[rx.Symbol("uv", i)] = rx.symbol("uv", i + off_u)
    for i in range(1, t.n_tau + 1):
        m[rx.Symbol("tau", i)] = rx.symbol("tau", i + off_t)
    for i in range(1, t.n_lam + 1):
        m[rx.Symbol("lam", i)] = rx.symbol("lam", i + off_l)
    return m


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(0, total + 1, 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _ordered_assignments(n, comp):
    """Ordered set partitions of 1..n with block sizes comp (blocks sorted)."""
    legs = list(range(1, n + 1))

    def go(avail, sizes):
        if not sizes:
            yield ()
            return
        k = sizes[0]
        from itertools import combinations
        for block in combinations(sorted(avail), k):
            rest = avail - set(block)
            for tail in go(rest, sizes[1:]):
                yield (tuple(block),) + tail

    return go(set(legs), comp)


def _factor_options(n_f, l_f):
    """Usable chain-factor contents for an (n_f)-point, l_f-loop slot."""
    if n_f >= 4:
        return build_gamma_terms(n_f, l_f)
    assert n_f == 2
    if l_f == 0:
        return ()  # no zero-order two-point insertion
    # two-point factors ride along as their on-shell value; the remaining
    # p-dependence of the two-point function vanishes identically at this
    # order (checked by the normalization step), so no further branches.
    return (_OnShellInsertion(l_f),)


def _assemble(n, l, comp, lsplit, assign, opts):
    """One chain assignment -> one raw parametric term of the flow integrand."""
    c = len(comp)
    dim = (n - 1) + 2
    slot_minus, slot_plus = dim - 2, dim - 1

    # index budget
    off_a = off_u = off_t = off_l = 0
    for t in opts:
        if isinstance(t, ParametricTerm):
            off_a += t.s
            off_u += t.n_uv
            off_t += t.n_tau
            off_l += t.n_lam
    n_chain = c - 1
    s_total = off_a + n_chain + 1
    a_s = rx.Symbol("alpha", s_total)

    coeff = Fraction(-1, 2) * Fraction((-1) ** (c + 1))
    i_power = 0
    g_power = 0
    loops = 1
    eps_power = 0
    rc_factors = []
    orderings = set()
    sum_ir = [a_s]
    insertions = []
    prefactors = []
    big = qf_zero(dim)

    # chain momenta q_j = p - sum of legs assigned to blocks 1..j
    p_row = [Fraction(0)] * dim
    p_row[slot_plus] = Fraction(1)
    q_rows = []
    acc = p_row
    for block in assign[:-1]:
        for i in block:
            acc = _row_add(acc, _neg(_leg_row(i, n, dim)))
        q_rows.append(acc)

    for j in range(n_chain):
        a_idx = off_a + 1 + j
        big = qf_add(big, qf_line(dim, q_rows[j], s_alpha_line(a_idx)))
        orderings.add((a_idx, s_total))
        sum_ir.append(rx.Symbol("alpha", a_idx))

    used_a = used_u = used_t = used_l = 0
    for k, t in enumerate(opts):
        if isinstance(t, _OnShellInsertion):
            insertions.append(TwoPointInsertion(t.loop_order, s_total))
            continue
        mapping = _shift_maps(t, used_a, used_u, used_t, used_l)

        coeff *= t.coeff
        i_power += t.i_power
        g_power += t.g_power
        loops += t.loops
        eps_power += t.eps_power
        rc_factors.extend(t.rc_factors)
        assert t.poly.is_one(), "chain factors with momentum polynomials not needed at this order"
        assert t.theta.boundary in ("below", "none")

        for lo, hi in t.theta.orderings:
            orderings.add((lo + used_a, hi + used_a))
        if t.theta.boundary == "below" and t.s > 0:
            orderings.add((t.s + used_a, s_total))
        for sym in t.sum_ir:
            m = mapping.get(sym)
            sum_ir.append(m.sym if m is not None else sym)
        for ins in t.insertions:
            insertions.append(TwoPointInsertion(ins.loop_order, ins.anchor + used_a))
        prefactors.append(_rename_split(t.prefactor, mapping))

        # instantiate the factor's momentum basis: its first n_f - 1 legs
        block = assign[k]
        legs = [_leg_row(i, n, dim) for i in block]
        if k == 0:
            legs.append(_neg(p_row))
        else:
            legs.append(_neg(q_rows[k - 1]))
        fq = _rename_quad(t.quad, mapping)
        assert fq.dim == len(legs)
        big = qf_add(big, qf_map_momenta(fq, legs, dim))

        used_a += t.s
        used_u += t.n_uv
        used_t += t.n_tau
        used_l += t.n_lam

    red = gauss_reduce(big, (slot_minus, slot_plus), s_total)
    prefactor = red.qfactor
    for q in prefactors:
        prefactor = s_mul(prefactor, q)

    origin = "c=%d;S=%s;l=%s" % (c, assign, lsplit)
    return ParametricTerm(
        n_external=n, loop_order=l, coeff=coeff, i_power=i_power % 4,
        g_power=g_power, loops=loops, s=s_total, n_uv=used_u, n_tau=used_t,
        n_lam=used_l,
        theta=ThetaConstraints(frozenset(orderings), "below"),
        quad=red.form, prefactor=prefactor, poly=POLY_ONE,
        sum_ir=tuple(sum_ir), insertions=tuple(insertions),
        eps_power=eps_power, rc_factors=tuple(rc_factors),
        origins=(origin,), trace=red.trace,
    )


def symmetrize(terms):
    """Merge terms that agree in everything but the rational coefficient.

    Mirror-image chain assignments land on identical reduced data; their
    reduction shorthands can differ by the sign of the d vector, which no
    downstream consumer is sensitive to, so the first trace is kept.
    """
    merged = {}
    for t in terms:
        key = t.canonical_key()
        prev = merged.get(key)
        if prev is None:
            merged[key] = t
        else:
            merged[key] = replace(
                prev, coeff=prev.coeff + t.coeff,
                origins=tuple(sorted(set(prev.origins + t.origins))),
            )
    out = [t for t in merged.values() if t.coeff != 0]
    out.sort(key=lambda t: t.canonical_key())
    return out


def two_point_normalize(flow_terms):
    """Rearrange two-point flow terms into off-shell and on-shell parts.

    The off-shell part subtracts the on-shell value and interpolates the
    momentum argument with a fresh tau parameter; the derivative brings down
    one power of the form entry and the monomial (p^2_eps - m^2).  The
    on-shell part keeps the value at the mass shell, integrated from the
    window top upward (hence the flipped boundary and sign).  Returns
    (terms, off_shell_zero).
    """
    out = []
    all_zero = True
    for t in flow_terms:
        assert t.n_external == 2 and t.quad.dim == 1
        assert t.poly.is_one(), "interpolation of polynomial terms not needed at this order"
        a = t.quad.entry(0, 0)
        p_dep = not a.is_zero()
        onshell_quad = QuadForm(
            1, ((s_zero(a.degree),),), s_add(t.quad.mass_part, a))
        out.append(replace(
            t,
            coeff=-t.coeff,
            quad=onshell_quad,
            theta=ThetaConstraints(t.theta.orderings, "above"),
            origins=tuple(o + ";onshell" for o in t.origins),
        ))
        if not p_dep:
            continue
        all_zero = False
        nt = t.n_tau + 1
        tt = rx.tau(nt)
        one_minus = rx.add(ONE, rx.mul(rat(-1), tt))
        off_quad = QuadForm(
            1, ((s_scale(tt, a),),),
            s_add(t.quad.mass_part, s_scale(one_minus, a)))
        out.append(replace(
            t,
            i_power=(t.i_power + 1) % 4,
            n_tau=nt,
            quad=off_quad,
            prefactor=s_mul(t.prefactor, a),
            poly=poly_onshell_factor(0),
            origins=tuple(o + ";offshell" for o in t.origins),
        ))
    return out, all_zero


def _boundary_term(n, l):
    dim = n - 1
    if n == 4:
        kind, poly = "c", POLY_ONE
    else:
        kind, poly = "b", poly_onshell_factor(0)
    return ParametricTerm(
        n_external=n, loop_order=l, coeff=Fraction(1), i_power=0, g_power=0,
        loops=0, s=0, n_uv=0, n_tau=0, n_lam=0,
        theta=ThetaConstraints(frozenset(), "none"),
        quad=qf_zero(dim), prefactor=rx.S_ONE, poly=poly,
        sum_ir=(), insertions=(), eps_power=0,
        rc_factors=((kind, l),), origins=("boundary",), trace=None,
    )


_MEMO = {}


def build_gamma_terms(n, l):
    """All parametric terms of the n-point function at loop order l.

    Returns a canonically ordered tuple of ParametricTerm.  The zero-order
    content is the bare vertex alone; flow terms carry the window integral
    of the loop reduction, two-point functions additionally the on-shell
    normalization split and the boundary slot for the derivative condition.
    """
    assert n >= 2 and n % 2 == 0 and l >= 0
    key = (n, l)
    if key in _MEMO:
        return _MEMO[key]
    if l == 0:
        if n == 4:
            terms = (ParametricTerm(
                n_external=4, loop_order=0, coeff=Fraction(1), i_power=0,
                g_power=1, loops=0, s=0, n_uv=0, n_tau=0, n_lam=0,
                theta=ThetaConstraints(frozenset(), "none"),
                quad=qf_zero(3), prefactor=rx.S_ONE, poly=POLY_ONE,
                sum_ir=(), insertions=(), eps_power=0, rc_factors=(),
                origins=("bare",), trace=None),)
        else:
            terms = ()
        _MEMO[key] = terms
        return terms

    raw = []
    max_c = n // 2 + max(l - 1, 0) + 1
    for c in range(1, max_c + 1):
        for comp in _compositions(n, c):
            for lsplit in _loop_splits(l - 1, c):
                option_lists = [
                    _factor_options(comp[k] + 2, lsplit[k]) for k in range(c)
                ]
                if any(not lst for lst in option_lists):
                    continue
                for assign in _ordered_assignments(n, comp):
                    for opts in _product(option_lists):
                        raw.append(_assemble(n, l, comp, lsplit, assign, opts))
    merged = symmetrize(raw)
    if n == 2:
        normalized, _ = two_point_normalize(merged)
        terms = tuple(normalized) + (_boundary_term(2, l),)
    elif n == 4:
        terms = tuple(merged) + (_boundary_term(4, l),)
    else:
        terms = tuple(merged)
    _MEMO[key] = terms
    return terms


def _loop_splits(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _loop_splits(total - first, parts - 1):
            yield (first,) + rest


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for tail in _product(lists[1:]):
            yield (head,) + tail


def offshell_zero(n, l):
    """Whether the off-shell flow part of the two-point function vanishes
    identically at this order (the boundary slot does not count)."""
    assert n == 2
    return not any(";offshell" in o
                   for t in build_gamma_terms(2, l) for o in t.origins)


def offshell_propagator_pieces(term, q_row):
    """Rewrite (q^2_eps - m^2) * C^{xi,alpha_s}(q) into its three pieces.

    The near-mass-shell factor of an off-shell two-point subfunction cancels
    the denominator of the propagator accompanying it on the line carrying
    momentum q: the product equals i e^{i xi x} - i e^{i alpha_s x}
    - i eps m^2 C^{xi,alpha_s}(q), with x = q^2_eps - m^2_eps.  The caller
    supplies the term WITHOUT that propagator line and WITHOUT the monomial
    factor; q_row (rationals over the term's momentum slots) must not touch
    an unreduced loop slot, since the pinned-scale piece adds alpha_s itself
    to the form entries.

    The last piece carries one explicit power of the deformation parameter
    and one more m^2; it is produced with a fresh flow parameter below
    alpha_s and its eps power recorded, so the evaluator can keep or drop it.
    """
    dim = term.quad.dim
    assert len(q_row) == dim
    s = term.s

    def line(weight):
        return qf_line(dim, q_row, weight)

    # piece 1: window-bottom exponential; a fresh uv symbol pins the scale
    nu = term.n_uv + 1
    t1 = replace(
        term,
        i_power=(term.i_power + 1) % 4,
        n_uv=nu,
        quad=qf_add(term.quad, line(s_uv_line(nu))),
        sum_ir=term.sum_ir + (rx.Symbol("uv", nu),),
        origins=tuple(o + ";cancel-bottom" for o in term.origins),
    )
    # piece 2: window-top exponential, pinned at alpha_s
    t2 = replace(
        term,
        coeff=-term.coeff,
        i_power=(term.i_power + 1) % 4,
        quad=qf_add(term.quad, line(s_alpha_line(s))),
        sum_ir=term.sum_ir + (rx.Symbol("alpha", s),),
        origins=tuple(o + ";cancel-top" for o in term.origins),
    )
    # piece 3: leftover deformation term, a regular line with an eps power
    shift = {rx.Symbol("alpha", s): rx.symbol("alpha", s + 1)}
    t3 = replace(
        term,
        coeff=-term.coeff,
        i_power=(term.i_power + 1) % 4,
        s=s + 1,
        quad=qf_add(_rename_quad(term.quad, shift),
                    qf_line(dim, q_row, s_alpha_line(s))),
        prefactor=_rename_split(term.prefactor, shift),
        theta=ThetaConstraints(
            frozenset((lo if lo != s else s + 1, hi if hi != s else s + 1)
                      for lo, hi in term.theta.orderings) | {(s, s + 1)},
            term.theta.boundary),
        sum_ir=tuple((rx.Symbol("alpha", s + 1) if sym == rx.Symbol("alpha", s)
                      else sym) for sym in term.sum_ir) + (rx.Symbol("alpha", s),),
        insertions=tuple(
            TwoPointInsertion(i.loop_order, s + 1 if i.anchor == s else i.anchor)
            for i in term.insertions),
        poly=MomentumPoly(tuple(
            (pairs, m2pow + 1, coeff) for pairs, m2pow, coeff in term.poly.items)),
        eps_power=term.eps_power + 1,
        origins=tuple(o + ";cancel-eps" for o in term.origins),
        trace=None,
    )
    return t1, t2, t3


def onshell_mass_constant(l, rc, cfg, xi, n_panels=64):
    """Value of the two-point function at the mass shell for the full flow:
    minus the integral of the on-shell flow derivative over the whole window.
    Computed from the on-shell terms by quadrature."""
    from .evaluator import onshell_twopoint_value
    return onshell_twopoint_value(l, xi, rc, cfg, xi, n_panels=n_panels)


# ---------------------------------------------------------------------------
# serialization for golden inventories


def term_to_obj(t):
    from .ratexpr import s_to_obj, to_obj
    return {
        "n": t.n_external, "l": t.loop_order,
        "coeff": str(t.coeff), "i_power": t.i_power, "g_power": t.g_power,
        "loops": t.loops, "s": t.s, "n_uv": t.n_uv, "n_tau": t.n_tau,
        "n_lam": t.n_lam,
        "orderings": sorted(t.theta.orderings),
        "boundary": t.theta.boundary,
        "quad": [[s_to_obj(e) for e in row] for row in t.quad.entries],
        "mass_part": s_to_obj(t.quad.mass_part),
        "prefactor": s_to_obj(t.prefactor),
        "poly": [[list(map(list, pairs)), m2pow, to_obj(c)]
                 for pairs, m2pow, c in t.poly.items],
        "sum_ir": [[sym.kind, sym.index] for sym in t.sum_ir],
        "insertions": [[i.loop_order, i.anchor] for i in t.insertions],
        "eps_power": t.eps_power,
        "rc_factors": [list(x) for x in t.rc_factors],
        "origins": list(t.origins),
    }


def term_from_obj(o):
    from .ratexpr import s_from_obj, from_obj
    dim = o["n"] - 1
    entries = tuple(tuple(s_from_obj(e) for e in row) for row in o["quad"])
    return ParametricTerm(
        n_external=o["n"], loop_order=o["l"], coeff=Fraction(o["coeff"]),
        i_power=o["i_power"], g_power=o["g_power"], loops=o["loops"],
        s=o["s"], n_uv=o["n_uv"], n_tau=o["n_tau"], n_lam=o["n_lam"],
        theta=ThetaConstraints(
            frozenset(tuple(x) for x in o["orderings"]), o["boundary"]),
        quad=QuadForm(dim, entries, s_from_obj(o["mass_part"])),
        prefactor=s_from_obj(o["prefactor"]),
        poly=MomentumPoly(tuple(
            (tuple(tuple(p) for p in pairs), m2pow, from_obj(c))
            for pairs, m2pow, c in o["poly"])),
        sum_ir=tuple(rx.Symbol(k, i) for k, i in o["sum_ir"]),
        insertions=tuple(TwoPointInsertion(lf, a) for lf, a in o["insertions"]),
        eps_power=o["eps_power"],
        rc_factors=tuple(tuple(x) for x in o["rc_factors"]),
        origins=tuple(o["origins"]),
        trace=None,
    )


def dump_terms(terms, path):
    with open(path, "w") as fh:
        json.dump([term_to_obj(t) for t in terms], fh, indent=1, sort_keys=True)


def load_terms(path):
    with open(path) as fh:
        return tuple(term_from_obj(o) for o in json.load(fh))
