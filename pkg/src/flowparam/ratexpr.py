"""Exact rational expression DAG over the flow parameters.

Expressions are built from integer/Fraction constants and typed symbols
(flow parameters ``alpha``, window-pinned parameters ``uv``, interpolation
parameters ``tau``, auxiliary parameters ``lam``) through +, *, integer
powers and division.  Nodes are hash-consed: structurally equal expressions
are the same object, so equality and hashing are O(1) and canonical
serialization is stable across processes.

Evaluation supports exact Fraction arithmetic and vectorized numpy
arithmetic from the same tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

SYMBOL_KINDS = ("alpha", "uv", "tau", "lam")


@dataclass(frozen=True, order=True)
class Symbol:
    kind: str
    index: int

    def __post_init__(self):
        assert self.kind in SYMBOL_KINDS, self.kind
        assert self.index >= 1

    def __repr__(self):
        return "%s%d" % (self.kind, self.index)


_INTERN = {}


class Expr:
    """A hash-consed node.  Do not construct directly; use rat/symbol/add/mul/pow_/div."""

    __slots__ = ("op", "num", "sym", "args", "exp", "key", "_hash")

    def __init__(self, op, num=None, sym=None, args=(), exp=0, key=None):
        self.op = op
        self.num = num
        self.sym = sym
        self.args = args
        self.exp = exp
        self.key = key
        self._hash = hash(key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    # arithmetic sugar; accepts ints and Fractions
    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return mul(rat(-1), self)

    def __sub__(self, other):
        return add(self, mul(rat(-1), _coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), mul(rat(-1), self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, e):
        return pow_(self, e)

    def __repr__(self):
        return _format(self)

    def is_zero(self):
        return self.op == "num" and self.num == 0

    def is_one(self):
        return self.op == "num" and self.num == 1


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return rat(x)
    raise TypeError("cannot coerce %r" % (x,))


def _intern(op, num=None, sym=None, args=(), exp=0):
    if op == "num":
        key = ("num", str(num), ())
    elif op == "sym":
        key = ("sym", "%s:%d" % (sym.kind, sym.index), ())
    elif op == "pow":
        key = ("pow", str(exp), (args[0].key,))
    else:
        key = (op, "", tuple(a.key for a in args))
    node = _INTERN.get(key)
    if node is None:
        node = Expr(op, num=num, sym=sym, args=args, exp=exp, key=key)
        _INTERN[key] = node
    return node


def rat(p, q=None):
    """Exact rational constant."""
    f = Fraction(p) if q is None else Fraction(p, q)
    return _intern("num", num=f)


ZERO = rat(0)
ONE = rat(1)


def symbol(kind, index):
    return _intern("sym", sym=Symbol(kind, index))


def alpha(i):
    return symbol("alpha", i)


def uv(i):
    return symbol("uv", i)


def tau(i):
    return symbol("tau", i)


def lam(i):
    return symbol("lam", i)


def _split_coeff(x):
    # represent x as (coeff, core) with core stripped of a leading constant
    if x.op == "num":
        return x.num, ONE
    if x.op == "mul" and x.args[0].op == "num":
        rest = x.args[1:]
        core = rest[0] if len(rest) == 1 else mul(*rest)
        return x.args[0].num, core
    return Fraction(1), x


def add(*xs):
    terms = {}  # core -> coefficient
    const = Fraction(0)
    stack = list(xs)
    while stack:
        x = _coerce(stack.pop())
        if x.op == "add":
            stack.extend(x.args)
            continue
        if x.op == "num":
            const += x.num
            continue
        c, core = _split_coeff(x)
        if core.op == "add":
            # distribute the constant so +x and c*x always cancel
            stack.extend(mul(rat(c), a) for a in core.args)
            continue
        acc = terms.get(core, Fraction(0)) + c
        if acc == 0:
            terms.pop(core, None)
        else:
            terms[core] = acc
    if not terms and const == 0:
        return ZERO
    # canonical overall sign: the constant, else the first core's coefficient,
    # is positive; a negative sum is stored as -1 * (positive sum), so that
    # squares of opposite-sign combinations are structurally identical
    ordered = sorted(terms, key=lambda n: n.key)
    lead = const if const != 0 else terms[ordered[0]]
    flip = lead < 0
    if flip:
        const = -const
        terms = {core: -c for core, c in terms.items()}
    args = []
    for core in ordered:
        c = terms[core]
        args.append(core if c == 1 else mul(rat(c), core))
    if const != 0:
        args.insert(0, rat(const))
    node = args[0] if len(args) == 1 else _intern("add", args=tuple(args))
    return mul(rat(-1), node) if flip else node


def mul(*xs):
    coeff = Fraction(1)
    powers = {}  # base -> integer exponent
    stack = list(xs)
    while stack:
        x = _coerce(stack.pop())
        if x.op == "mul":
            stack.extend(x.args)
            continue
        if x.op == "num":
            coeff *= x.num
            if coeff == 0:
                return ZERO
            continue
        if x.op == "pow":
            base, e = x.args[0], x.exp
        else:
            base, e = x, 1
        acc = powers.get(base, 0) + e
        if acc == 0:
            powers.pop(base, None)
        else:
            powers[base] = acc
    args = []
    for base in sorted(powers, key=lambda n: n.key):
        e = powers[base]
        args.append(base if e == 1 else pow_(base, e))
    if not args:
        return rat(coeff)
    if coeff != 1:
        args.insert(0, rat(coeff))
    if len(args) == 1:
        return args[0]
    return _intern("mul", args=tuple(args))


def pow_(x, e):
    x = _coerce(x)
    assert isinstance(e, int)
    if e == 0:
        assert not x.is_zero()
        return ONE
    if e == 1:
        return x
    if x.op == "num":
        assert not (x.num == 0 and e < 0)
        return rat(x.num ** e)
    if x.op == "pow":
        return pow_(x.args[0], x.exp * e)
    if x.op == "mul":
        return mul(*[pow_(a, e) for a in x.args])
    return _intern("pow", args=(x,), exp=e)


def div(a, b):
    return mul(_coerce(a), pow_(_coerce(b), -1))


def _format(x, prec=0):
    if x.op == "num":
        s = str(x.num)
        return "(%s)" % s if x.num < 0 and prec > 0 else s
    if x.op == "sym":
        return repr(x.sym)
    if x.op == "add":
        s = " + ".join(_format(a, 1) for a in x.args)
        return "(%s)" % s if prec > 1 else s
    if x.op == "mul":
        return "*".join(_format(a, 2) for a in x.args)
    if x.op == "pow":
        return "%s^%d" % (_format(x.args[0], 3), x.exp)
    raise AssertionError(x.op)


def evaluate(x, env, exact=False):
    """Evaluate the DAG at ``env``: {Symbol: value}.

    Values may be floats, complex numbers or broadcast-compatible numpy
    arrays.  With exact=True all env values must be Fractions/ints and the
    result is an exact Fraction.
    """
    memo = {}

    def go(n):
        v = memo.get(n)
        if v is not None:
            return v
        if n.op == "num":
            v = n.num if exact else float(n.num)
        elif n.op == "sym":
            v = env[n.sym]
        elif n.op == "add":
            v = go(n.args[0])
            for a in n.args[1:]:
                v = v + go(a)
        elif n.op == "mul":
            v = go(n.args[0])
            for a in n.args[1:]:
                v = v * go(a)
        else:
            v = go(n.args[0]) ** n.exp
        memo[n] = v
        return v

    return go(x)


def free_symbols(x):
    memo = {}

    def go(n):
        v = memo.get(n)
        if v is not None:
            return v
        if n.op == "num":
            v = frozenset()
        elif n.op == "sym":
            v = frozenset((n.sym,))
        else:
            v = frozenset().union(*[go(a) for a in n.args])
        memo[n] = v
        return v

    return go(x)


def diff(x, s):
    """Exact derivative with respect to Symbol s."""
    memo = {}

    def go(n):
        v = memo.get(n)
        if v is not None:
            return v
        if n.op == "num":
            v = ZERO
        elif n.op == "sym":
            v = ONE if n.sym == s else ZERO
        elif n.op == "add":
            v = add(*[go(a) for a in n.args])
        elif n.op == "mul":
            parts = []
            for i, a in enumerate(n.args):
                da = go(a)
                if not da.is_zero():
                    parts.append(mul(da, *[b for j, b in enumerate(n.args) if j != i]))
            v = add(*parts) if parts else ZERO
        else:
            base = n.args[0]
            db = go(base)
            v = ZERO if db.is_zero() else mul(rat(n.exp), pow_(base, n.exp - 1), db)
        memo[n] = v
        return v

    return go(x)


def subst(x, mapping):
    """Replace symbols by expressions: mapping {Symbol: Expr}."""
    memo = {}

    def go(n):
        v = memo.get(n)
        if v is not None:
            return v
        if n.op == "num":
            v = n
        elif n.op == "sym":
            v = mapping.get(n.sym, n)
        elif n.op == "add":
            v = add(*[go(a) for a in n.args])
        elif n.op == "mul":
            v = mul(*[go(a) for a in n.args])
        else:
            v = pow_(go(n.args[0]), n.exp)
        memo[n] = v
        return v

    return go(x)


def denominator_bases(x):
    """All subexpressions raised to a negative power."""
    memo = set()
    out = set()
    stack = [x]
    while stack:
        n = stack.pop()
        if n in memo:
            continue
        memo.add(n)
        if n.op == "pow" and n.exp < 0:
            out.add(n.args[0])
        stack.extend(n.args)
    return out


def to_obj(x):
    """Serialize to JSON-able dict (topological node list)."""
    order = []
    index = {}

    def visit(n):
        if n in index:
            return
        for a in n.args:
            visit(a)
        index[n] = len(order)
        order.append(n)

    visit(x)
    nodes = []
    for n in order:
        if n.op == "num":
            nodes.append(["num", str(n.num)])
        elif n.op == "sym":
            nodes.append(["sym", n.sym.kind, n.sym.index])
        elif n.op == "pow":
            nodes.append(["pow", n.exp, index[n.args[0]]])
        else:
            nodes.append([n.op] + [index[a] for a in n.args])
    return {"nodes": nodes, "root": index[x]}


def from_obj(obj):
    built = []
    for rec in obj["nodes"]:
        op = rec[0]
        if op == "num":
            built.append(rat(Fraction(rec[1])))
        elif op == "sym":
            built.append(symbol(rec[1], rec[2]))
        elif op == "pow":
            built.append(pow_(built[rec[2]], rec[1]))
        elif op == "add":
            built.append(add(*[built[i] for i in rec[1:]]))
        elif op == "mul":
            built.append(mul(*[built[i] for i in rec[1:]]))
        else:
            raise ValueError(op)
    return built[obj["root"]]


# ---------------------------------------------------------------------------
# three-part scaling split
#
# A SplitExpr tracks, alongside the full expression, its exact leading and
# subleading behaviour under alpha -> rho*alpha with the uv parameters held
# fixed: part0 scales exactly like rho^degree, part1 exactly like
# rho^(degree-1), and the remainder (total - part0 - part1) decays at least
# one power faster.  The remainder is stored implicitly as the exact
# difference, so part0 + part1 + part2 == total identically.


@dataclass(frozen=True)
class SplitExpr:
    total: Expr
    part0: Expr
    part1: Expr
    degree: int

    @property
    def part2(self):
        return add(self.total, mul(rat(-1), self.part0), mul(rat(-1), self.part1))

    def is_zero(self):
        return self.total.is_zero()


def s_zero(degree=0):
    return SplitExpr(ZERO, ZERO, ZERO, degree)


S_ONE = SplitExpr(ONE, ONE, ZERO, 0)


def s_const(c):
    c = _coerce(c)
    return SplitExpr(c, c, ZERO, 0)


def s_alpha_line(i):
    a = alpha(i)
    return SplitExpr(a, a, ZERO, 1)


def s_uv_line(i):
    u = uv(i)
    return SplitExpr(u, ZERO, u, 1)


def s_add(*xs, degree=None):
    xs = list(xs)
    if degree is None:
        assert xs
        degree = xs[0].degree
    for x in xs:
        assert x.degree == degree, (x.degree, degree)
    return SplitExpr(
        add(*[x.total for x in xs]) if xs else ZERO,
        add(*[x.part0 for x in xs]) if xs else ZERO,
        add(*[x.part1 for x in xs]) if xs else ZERO,
        degree,
    )


def s_neg(x):
    m = rat(-1)
    return SplitExpr(mul(m, x.total), mul(m, x.part0), mul(m, x.part1), x.degree)


def s_scale(c, x):
    # c must be scale-invariant (rational constant or tau/lam symbols only)
    c = _coerce(c)
    for s in free_symbols(c):
        assert s.kind in ("tau", "lam"), s
    return SplitExpr(mul(c, x.total), mul(c, x.part0), mul(c, x.part1), x.degree)


def s_mul(x, y):
    return SplitExpr(
        mul(x.total, y.total),
        mul(x.part0, y.part0),
        add(mul(x.part0, y.part1), mul(x.part1, y.part0)),
        x.degree + y.degree,
    )


def s_recip(x):
    """1/x for a split with nonvanishing leading part (degree drops to -degree).

    The carried parts follow the first-order expansion 1/(x0+x1+...) =
    1/x0 - x1/x0^2 + ...; the remainder is again the exact difference.
    """
    assert not x.part0.is_zero()
    t0 = pow_(x.part0, -1)
    return SplitExpr(
        pow_(x.total, -1),
        t0,
        mul(rat(-1), x.part1, pow_(x.part0, -2)),
        -x.degree,
    )


def s_from_obj(obj):
    return SplitExpr(
        from_obj(obj["total"]),
        from_obj(obj["part0"]),
        from_obj(obj["part1"]),
        obj["degree"],
    )


def s_to_obj(x):
    return {
        "total": to_obj(x.total),
        "part0": to_obj(x.part0),
        "part1": to_obj(x.part1),
        "degree": x.degree,
    }
