"""Polynomials and rational functions of the formal indeterminate p with
jet-quotient coefficients, including the partial-fraction view whose poles
are symbolic field names assumed pairwise distinct (general position:
pole differences like w1 - v1 are treated as invertible and never tested
for vanishing)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .jetalg import (
    ONE,
    ZERO,
    DiffPoly,
    FieldId,
    JetQuotient,
    PoleError,
    StructureError,
    divide_exact,
    evaluate,
    jet,
    strip_monomial,
    content,
    _as_quotient,
)


class ParameterError(ValueError):
    """Invalid constructor or operation parameters."""


def _q(x) -> JetQuotient:
    q = _as_quotient(x)
    if q is NotImplemented:
        raise StructureError(f"not coercible to a jet quotient: {x!r}")
    return q


class PPoly:
    """Coefficients by ascending p-degree; leading coefficient nonzero."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_q(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def const(c) -> "PPoly":
        return PPoly([_q(c)])

    @staticmethod
    def x() -> "PPoly":
        return PPoly([JetQuotient(ZERO), JetQuotient(ONE)])

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __getitem__(self, k: int) -> JetQuotient:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return JetQuotient(ZERO)

    def __eq__(self, other):
        if not isinstance(other, PPoly):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, PPoly):
            other = PPoly.const(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return PPoly([self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return PPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, PPoly):
            other = PPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, DiffPoly, JetQuotient)):
            c = _q(other)
            return PPoly([a * c for a in self.coeffs])
        if not isinstance(other, PPoly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PPoly()
        out = [JetQuotient(ZERO)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                out[i + j] = out[i + j] + a * b
        return PPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise StructureError("negative power")
        result = PPoly.const(1)
        for _ in range(k):
            result = result * self
        return result

    def shift(self, k: int) -> "PPoly":
        """Multiply by p**k."""
        if self.is_zero():
            return self
        return PPoly([JetQuotient(ZERO)] * k + list(self.coeffs))

    def deriv(self) -> "PPoly":
        return PPoly([self.coeffs[k] * k for k in range(1, len(self.coeffs))])

    def eval_at(self, value) -> JetQuotient:
        """Horner evaluation at a jet-quotient value of p."""
        v = _q(value)
        acc = JetQuotient(ZERO)
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def eval_numeric(self, pval: Fraction, point: dict) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * pval + evaluate(c, point)
        return acc

    def map_coeffs(self, fn) -> "PPoly":
        return PPoly([fn(c) for c in self.coeffs])

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if k == 0:
                parts.append(f"({c!r})")
            elif k == 1:
                parts.append(f"({c!r})*p")
            else:
                parts.append(f"({c!r})*p^{k}")
        return " + ".join(parts)


def coefficients(q: PPoly) -> list[JetQuotient]:
    """Coefficient sequence by ascending degree; empty for the zero
    polynomial."""
    return list(q.coeffs)


def poly_divmod(a: PPoly, b: PPoly) -> tuple[PPoly, PPoly]:
    if b.is_zero():
        raise PoleError("polynomial division by zero")
    quot = [JetQuotient(ZERO)] * max(0, a.degree() - b.degree() + 1)
    rem = list(a.coeffs)
    db, lead = b.degree(), b.coeffs[-1]
    while len(rem) - 1 >= db and rem:
        k = len(rem) - 1 - db
        c = rem[-1] / lead
        quot[k] = c
        for j in range(db + 1):
            rem[k + j] = rem[k + j] - c * b.coeffs[j]
        while rem and rem[-1].is_zero():
            rem.pop()
    return PPoly(quot), PPoly(rem)


def poly_div_exact(a: PPoly, b: PPoly) -> PPoly | None:
    q, r = poly_divmod(a, b)
    return q if r.is_zero() else None


@dataclass(frozen=True)
class PoleBlock:
    pole: FieldId
    order: int
    residues: tuple[JetQuotient, ...]  # residues[k] multiplies 1/(p-pole)^(k+1)


@dataclass(frozen=True)
class PartialFractions:
    polypart: PPoly
    poles: tuple[PoleBlock, ...]

    def reassemble(self) -> "PRational":
        total = PRational(self.polypart, PPoly.const(1))
        for blk in self.poles:
            lin = PPoly([-_q(jet(blk.pole)), JetQuotient(ONE)])  # p - pole
            for k, res in enumerate(blk.residues):
                if res.is_zero():
                    continue
                total = total + PRational(PPoly([res]), lin ** (k + 1))
        return total


class PRational:
    """num/den of PPoly; den nonzero with leading coefficient normalized
    to 1.  An optional partial-fraction view is carried alongside and must
    reassemble to exactly the same fraction."""

    __slots__ = ("num", "den", "pf")

    def __init__(self, num: PPoly, den: PPoly | None = None, pf: PartialFractions | None = None):
        if not isinstance(num, PPoly):
            num = PPoly.const(num)
        if den is None:
            den = PPoly.const(1)
        elif not isinstance(den, PPoly):
            den = PPoly.const(den)
        if den.is_zero():
            raise PoleError("zero p-denominator")
        if num.is_zero():
            self.num, self.den, self.pf = PPoly(), PPoly.const(1), pf
            return
        if den.degree() == 0:
            c = den.coeffs[0]
            if not (c == 1):
                num = num * (JetQuotient(ONE) / c)
            den = PPoly.const(1)
        else:
            lead = den.coeffs[-1]
            if not (lead == 1):
                inv = JetQuotient(ONE) / lead
                num = num * inv
                den = den * inv
        self.num, self.den, self.pf = num, den, pf

    @staticmethod
    def const(c) -> "PRational":
        return PRational(PPoly.const(c))

    @staticmethod
    def p() -> "PRational":
        return PRational(PPoly.x())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, DiffPoly, JetQuotient)):
            other = PRational.const(other)
        if not isinstance(other, PRational):
            return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def __add__(self, other):
        other = _as_prational(other)
        if self.den == other.den:
            return PRational(self.num + other.num, self.den)
        # exact-divisibility alignment keeps family denominators factored
        q = poly_div_exact(other.den, self.den)
        if q is not None:
            return PRational(self.num * q + other.num, other.den)
        q = poly_div_exact(self.den, other.den)
        if q is not None:
            return PRational(self.num + other.num * q, self.den)
        return PRational(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        r = object.__new__(PRational)
        r.num, r.den, r.pf = -self.num, self.den, None
        return r

    def __sub__(self, other):
        return self + (-_as_prational(other))

    def __rsub__(self, other):
        return (-self) + _as_prational(other)

    def __mul__(self, other):
        other = _as_prational(other)
        return PRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_prational(other)
        if other.is_zero():
            raise PoleError("division by the zero rational function")
        return PRational(self.num * other.den, self.den * other.num)

    def pdiff(self) -> "PRational":
        """Formal d/dp by the quotient rule; a partial-fraction view is
        differentiated blockwise and kept."""
        if self.pf is not None:
            blocks = []
            for blk in self.pf.poles:
                res = [JetQuotient(ZERO)] + [-(k + 1) * r for k, r in enumerate(blk.residues)]
                blocks.append(PoleBlock(blk.pole, blk.order + 1, tuple(res)))
            new_pf = PartialFractions(self.pf.polypart.deriv(), tuple(blocks))
            flat = new_pf.reassemble()
            return PRational(flat.num, flat.den, new_pf)
        dn = self.num.deriv()
        dd = self.den.deriv()
        if dd.is_zero():
            return PRational(dn, self.den)
        return PRational(dn * self.den - self.num * dd, self.den * self.den)

    def compose_linear(self, c1, c0) -> "PRational":
        """Evaluate at p -> c1*p + c0 (jet-quotient constants, c1 != 0)."""
        arg = PPoly([_q(c0), _q(c1)])
        num = PPoly()
        for c in reversed(self.num.coeffs):
            num = num * arg + PPoly([c])
        den = PPoly()
        for c in reversed(self.den.coeffs):
            den = den * arg + PPoly([c])
        return PRational(num, den)

    def eval_numeric(self, pval: Fraction, point: dict) -> Fraction:
        dv = self.den.eval_numeric(pval, point)
        if dv == 0:
            raise PoleError("p-denominator vanishes")
        return self.num.eval_numeric(pval, point) / dv

    def cleared(self) -> tuple[PPoly, PPoly]:
        """Cross-multiplied single fraction whose coefficients have jet
        denominator 1, with shared monomial content removed."""
        mult = ONE
        for c in list(self.num.coeffs) + list(self.den.coeffs):
            if c.den == ONE:
                continue
            if divide_exact(mult, c.den) is None:
                mult = mult * c.den
        mq = JetQuotient(mult)
        num = [c * mq for c in self.num.coeffs]
        den = [c * mq for c in self.den.coeffs]
        for c in num + den:
            if not (c.den == ONE):
                raise StructureError("denominator clearing failed")
        polys = [c.num for c in num + den if not c.num.is_zero()]
        common = None
        for e in polys:
            _, mono = content(e)
            md = dict(zip(mono[0::2], mono[1::2]))
            if common is None:
                common = md
            else:
                common = {j: min(p, md[j]) for j, p in common.items() if j in md}
        if common:
            mono = tuple(x for j in sorted(common) for x in (j, common[j]))
            num = [JetQuotient(strip_monomial(c.num, mono)) if not c.num.is_zero() else c for c in num]
            den = [JetQuotient(strip_monomial(c.num, mono)) if not c.num.is_zero() else c for c in den]
        return PPoly(num), PPoly(den)

    def field_ids(self) -> set[FieldId]:
        out = set()
        for c in list(self.num.coeffs) + list(self.den.coeffs):
            for jv in c.jet_variables():
                out.add(jv.field)
        return out

    def __repr__(self):
        if self.den.degree() == 0 and not self.den.is_zero():
            return repr(self.num)
        return f"[{self.num!r}] / [{self.den!r}]"


def _as_prational(x) -> PRational:
    if isinstance(x, PRational):
        return x
    if isinstance(x, PPoly):
        return PRational(x)
    if isinstance(x, (int, Fraction, DiffPoly, JetQuotient)):
        return PRational.const(x)
    raise StructureError(f"not coercible to PRational: {x!r}")


def collect(r: PRational) -> tuple[PPoly, PPoly]:
    """Bring a rational function of p to a common denominator.  When a
    partial-fraction view is present it is reassembled first, so both
    views collect identically."""
    if r.pf is not None:
        r = r.pf.reassemble()
    return r.cleared()


def partial_fraction(r: PRational, poles: list[tuple[FieldId, int]], validate: str | None = None) -> PRational:
    """Attach a partial-fraction view over the given symbolic poles.

    Pole orders above 2 are rejected.  Each block is solved locally from
    the Laurent data after deflating the denominator by synthetic
    division, which is the triangular special case of the linear system
    that matching coefficients would set up.

    The view is checked against the fraction it came from: exactly (full
    reassembly) when the denominator degree stays small, otherwise at
    random rational points, since symbolic reassembly of large residue
    quotients is quadratically expensive and the extraction itself is
    already exact."""
    for _, order in poles:
        if order > 2:
            raise ParameterError("pole orders above 2 are not supported")
        if order < 1:
            raise ParameterError("pole order must be positive")
    # additive chains can leave the fraction unreduced in the declared
    # poles (no polynomial gcd at this level); cancel those first
    num, den = r.num, r.den
    for fid, _ in poles:
        lin_f = PPoly([-_q(jet(fid)), JetQuotient(ONE)])
        while True:
            qn = poly_div_exact(num, lin_f)
            if qn is None:
                break
            qd = poly_div_exact(den, lin_f)
            if qd is None:
                break
            num, den = qn, qd
    r = PRational(num, den)
    polypart, rem = poly_divmod(r.num, r.den)
    blocks = []
    for fid, order in poles:
        pole_val = _q(jet(fid))
        lin = PPoly([-pole_val, JetQuotient(ONE)])
        deflated = r.den
        for _ in range(order):
            deflated, rr = poly_divmod(deflated, lin)
            if not rr.is_zero():
                raise ParameterError(f"{fid.name} is not a pole of order {order}")
        q_at = deflated.eval_at(pole_val)
        if q_at.is_zero():
            raise ParameterError(f"pole {fid.name} not in general position")
        n_at = rem.eval_at(pole_val)
        if order == 1:
            blocks.append(PoleBlock(fid, 1, (n_at / q_at,)))
        else:
            top = n_at / q_at
            np_at = rem.deriv().eval_at(pole_val)
            qp_at = deflated.deriv().eval_at(pole_val)
            first = (np_at * q_at - n_at * qp_at) / (q_at * q_at)
            blocks.append(PoleBlock(fid, 2, (first, top)))
    pf = PartialFractions(polypart, tuple(blocks))
    if validate is None:
        validate = "exact" if r.den.degree() <= 4 else "numeric"
    if validate == "exact":
        if not (pf.reassemble() == r):
            raise ParameterError("partial fractions do not reassemble; pole list incomplete?")
    elif validate == "numeric":
        _pf_spot_check(pf, r)
    elif validate != "off":
        raise ParameterError(f"unknown validation mode {validate!r}")
    return PRational(r.num, r.den, pf)


def _pf_spot_check(pf: PartialFractions, r: PRational, points: int = 5):
    """Cross-oracle only: compare the view and the fraction at random
    rational arguments (exact arithmetic, poles rejected)."""
    import random

    from .jetalg import JetVariable
    from .sampling import random_point, random_rational

    rng = random.Random(60170)
    jvs = set()
    for c in list(r.num.coeffs) + list(r.den.coeffs):
        jvs.update(c.jet_variables())
    pole_jets = [JetVariable(blk.pole) for blk in pf.poles]
    jvs.update(pole_jets)
    for blk in pf.poles:
        for res in blk.residues:
            jvs.update(res.jet_variables())
    pairs = [(pole_jets[i], pole_jets[j]) for i in range(len(pole_jets)) for j in range(i + 1, len(pole_jets))]
    for _ in range(points):
        pt = random_point(jvs, rng, pole_pairs=pairs)
        pval = Fraction(0)
        for _ in range(100):
            pval = random_rational(rng)
            if all(abs(pval - pt[pj]) >= Fraction(1, 10) for pj in pole_jets):
                break
        lhs = r.eval_numeric(pval, pt)
        rhs = pf.polypart.eval_numeric(pval, pt)
        for blk in pf.poles:
            loc = pt[JetVariable(blk.pole)]
            for k, res in enumerate(blk.residues):
                if res.is_zero():
                    continue
                rhs += evaluate(res, pt) / (pval - loc) ** (k + 1)
        if lhs != rhs:
            raise ParameterError("partial fractions fail the random-point cross-check")
