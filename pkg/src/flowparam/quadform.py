"""Quadratic forms in the external momenta and their loop reduction.

A QuadForm stores the symmetric coefficient matrix A of the momentum phase
(p_k, A_kv p_v) together with the scalar coefficient of m^2, every entry a
SplitExpr carrying its exact scaling decomposition.  gauss_reduce eliminates
one loop-momentum slot pair by completing the square, producing the reduced
form, the rational Gaussian prefactor and the reduction shorthands needed by
the large-parameter diagnostics.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ratexpr as rx
from .ratexpr import SplitExpr, s_add, s_mul, s_neg, s_recip, s_zero


@dataclass(frozen=True)
class ParamVector:
    """A point in parameter space.

    alphas are the flow parameters (the last one is the outermost scale),
    uvs sit at the lower window edge, taus and lams are interpolation
    parameters in [0, 1].  xi is the lower window edge itself.
    """

    alphas: tuple
    uvs: tuple = ()
    taus: tuple = ()
    lams: tuple = ()
    xi: float = 1.0

    def validate(self):
        assert self.xi > 0
        for a in self.alphas:
            assert a >= self.xi * (1 - 1e-12), (a, self.xi)
        for u in self.uvs:
            assert 0 < u <= self.xi * (1 + 1e-12)
        for t in self.taus + self.lams:
            assert 0 <= t <= 1

    def env(self):
        e = {}
        for i, a in enumerate(self.alphas, start=1):
            e[rx.Symbol("alpha", i)] = a
        for i, u in enumerate(self.uvs, start=1):
            e[rx.Symbol("uv", i)] = u
        for i, t in enumerate(self.taus, start=1):
            e[rx.Symbol("tau", i)] = t
        for i, t in enumerate(self.lams, start=1):
            e[rx.Symbol("lam", i)] = t
        return e


def scale_params(pv, rho, mode="alpha"):
    """Scale a ParamVector by rho.

    mode="alpha" scales only the flow parameters (the split grading);
    mode="joint" also scales the uv parameters and the window edge
    (the grading under which every form entry is homogeneous).
    """
    assert mode in ("alpha", "joint")
    alphas = tuple(a * rho for a in pv.alphas)
    if mode == "alpha":
        return ParamVector(alphas, pv.uvs, pv.taus, pv.lams, pv.xi)
    return ParamVector(
        alphas, tuple(u * rho for u in pv.uvs), pv.taus, pv.lams, pv.xi * rho
    )


ScalingSplit = namedtuple("ScalingSplit", ["lead", "sub", "rest", "degree"])


def decompose_scaling(entry):
    """Return the (exact-leading, exact-subleading, remainder) parts.

    Only defined for entries built through the reduction recursion; a bare
    expression has no tracked decomposition.
    """
    if not isinstance(entry, SplitExpr):
        raise TypeError("entry was not built through the reduction recursion")
    return ScalingSplit(entry.part0, entry.part1, entry.part2, entry.degree)


def diff_alpha_s(expr, s):
    """d/d alpha_s, with s the index of the outermost flow parameter."""
    return rx.diff(expr, rx.Symbol("alpha", s))


@dataclass(frozen=True)
class QuadForm:
    dim: int
    entries: tuple  # dim x dim of SplitExpr, symmetric
    mass_part: SplitExpr

    def __post_init__(self):
        assert len(self.entries) == self.dim
        for row in self.entries:
            assert len(row) == self.dim
        for k in range(self.dim):
            for v in range(k):
                assert self.entries[k][v] is self.entries[v][k] or (
                    self.entries[k][v].total == self.entries[v][k].total
                )

    def entry(self, k, v):
        return self.entries[k][v]

    def evaluate(self, env, which="total"):
        """Numeric matrix of the chosen split component."""
        out = np.empty((self.dim, self.dim), dtype=complex)
        for k in range(self.dim):
            for v in range(self.dim):
                e = self.entries[k][v]
                x = {"total": e.total, "part0": e.part0, "part1": e.part1,
                     "part2": e.part2}[which]
                out[k, v] = complex(rx.evaluate(x, env))
        return out

    def evaluate_mass(self, env, which="total"):
        e = self.mass_part
        x = {"total": e.total, "part0": e.part0, "part1": e.part1,
             "part2": e.part2}[which]
        return complex(rx.evaluate(x, env))


def qf_zero(dim, degree=1):
    row = tuple(s_zero(degree) for _ in range(dim))
    return QuadForm(dim, tuple(row for _ in range(dim)), s_zero(degree))


def qf_add(a, b):
    assert a.dim == b.dim
    entries = tuple(
        tuple(s_add(a.entries[k][v], b.entries[k][v]) for v in range(a.dim))
        for k in range(a.dim)
    )
    return QuadForm(a.dim, entries, s_add(a.mass_part, b.mass_part))


def qf_line(dim, coeffs, weight, mass_weight=None):
    """weight * (sum_k c_k p_k)^2 as a QuadForm over dim slots.

    coeffs are exact rationals; weight is a degree-1 SplitExpr.  The same
    weight also multiplies -m^2_eps through the term's parameter sum, which
    is tracked separately; mass_weight here is only for explicit m^2
    coefficients (rarely needed).
    """
    coeffs = [Fraction(c) for c in coeffs]
    assert len(coeffs) == dim
    entries = []
    for k in range(dim):
        row = []
        for v in range(dim):
            c = coeffs[k] * coeffs[v]
            if c == 0:
                row.append(s_zero(weight.degree))
            else:
                row.append(SplitExpr(
                    rx.mul(rx.rat(c), weight.total),
                    rx.mul(rx.rat(c), weight.part0),
                    rx.mul(rx.rat(c), weight.part1),
                    weight.degree,
                ))
        entries.append(tuple(row))
    mass = mass_weight if mass_weight is not None else s_zero(weight.degree)
    return QuadForm(dim, tuple(entries), mass)


def qf_map_momenta(form, rows, new_dim):
    """Congruence transform: old slot k carries momentum sum_j rows[k][j] q_j.

    rows is a dim x new_dim rational matrix; returns the form over the new
    slots.  Exact scaling parts map entrywise, so the decomposition survives.
    """
    dim = form.dim
    assert len(rows) == dim
    deg = form.entries[0][0].degree
    acc = [[[] for _ in range(new_dim)] for _ in range(new_dim)]
    for k in range(dim):
        for v in range(dim):
            e = form.entries[k][v]
            if e.is_zero():
                continue
            for i in range(new_dim):
                cki = Fraction(rows[k][i])
                if cki == 0:
                    continue
                for j in range(new_dim):
                    cvj = Fraction(rows[v][j])
                    if cvj == 0:
                        continue
                    c = rx.rat(cki * cvj)
                    acc[i][j].append(SplitExpr(
                        rx.mul(c, e.total), rx.mul(c, e.part0),
                        rx.mul(c, e.part1), e.degree))
    entries = tuple(
        tuple(s_add(*acc[i][j], degree=deg) if acc[i][j] else s_zero(deg)
              for j in range(new_dim))
        for i in range(new_dim)
    )
    return QuadForm(new_dim, entries, form.mass_part)


ReductionTrace = namedtuple("ReductionTrace", ["f", "d", "ext"])

ReducedGauss = namedtuple("ReducedGauss", ["form", "qfactor", "trace"])


def gauss_reduce(big, loop_pair, s_index):
    """Integrate out the loop momentum pair by completing the square.

    big is the full form over external slots plus the two loop slots
    (carrying -p and +p); s_index is the index of the flow parameter whose
    i*alpha_s p^2 phase accompanies the loop integral.  Entries coupling to
    the loop slots must not contain alpha_s.  Returns the reduced form over
    the external slots, the squared rational prefactor 1/(f + alpha_s)^2 as
    a SplitExpr of degree -2, and the shorthands (f, d_k, unreduced external
    block) used downstream.
    """
    n_m, n_p = loop_pair
    dim = big.dim
    ext = [k for k in range(dim) if k not in (n_m, n_p)]
    a_s = rx.Symbol("alpha", s_index)

    # f = coefficient of p^2 from the loop slots
    f = s_add(
        big.entry(n_m, n_m),
        big.entry(n_p, n_p),
        s_neg(SplitExpr(
            rx.mul(rx.rat(2), big.entry(n_m, n_p).total),
            rx.mul(rx.rat(2), big.entry(n_m, n_p).part0),
            rx.mul(rx.rat(2), big.entry(n_m, n_p).part1),
            big.entry(n_m, n_p).degree,
        )),
    )
    d = [s_add(big.entry(k, n_p), s_neg(big.entry(k, n_m))) for k in ext]
    for x in [f] + d:
        assert a_s not in rx.free_symbols(x.total), "loop entries depend on alpha_s"

    denom = s_add(f, rx.s_alpha_line(s_index))
    t = s_recip(denom)  # degree -1
    qfactor = s_mul(t, t)

    entries = []
    for ii, k in enumerate(ext):
        row = []
        for jj, v in enumerate(ext):
            corr = s_neg(s_mul(s_mul(d[ii], d[jj]), t))
            row.append(s_add(big.entry(k, v), corr))
        entries.append(tuple(row))
    ext_block = tuple(
        tuple(big.entry(k, v) for v in ext) for k in ext
    )
    reduced = QuadForm(len(ext), tuple(entries), big.mass_part)
    trace = ReductionTrace(
        f=f, d=tuple(d),
        ext=QuadForm(len(ext), ext_block, big.mass_part),
    )
    return ReducedGauss(reduced, qfactor, trace)
