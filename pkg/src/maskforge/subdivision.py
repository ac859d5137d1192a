"""Subdivision operators, their norms, and convergence / C1 verdicts.

A mask (scalar or matrix of masks) acts on finitely supported sequences by

    (S f)_alpha = sum_beta A_(alpha - M beta) f_beta,

where the coefficients A are read straight off the mask's frequency support
(coefficient at frequency alpha acts at offset alpha).  The difference scheme
of a decomposed mask satisfies the exact operator identity

    grad(S_t f) = S_T grad(f),      T[k][j] = entry(j, k),

which is what ties decompositions to convergence; one more decomposition
level gives grad(S_T g) = S_Q grad(g).  Norm verdicts are certified: an
operator norm below 1 is claimed only when the whole enclosing interval is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from .cyclotomic import CyclotomicNumber, coerce, magnitude_interval
from .decompose import MaskDecomposition, decompose_mask, decompose_to_class
from .errors import MaskforgeError, ShapeMismatch
from .intervals import RatInterval, interval_max
from .lattice import (DilationContext, IsotropyReport, coset_fraction_key,
                      is_isotropic, mat_mul, mat_vec, matrix_inverse,
                      matrix_power, power_inf_norm, transpose)
from .sumrules import sum_rule_order
from .trigpoly import TrigPoly

DEFAULT_POWER_CAP = 8


def _plus(a, b):
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Fraction(a) + Fraction(b)
    return coerce(a) + coerce(b)


def _times(a, b):
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Fraction(a) * Fraction(b)
    return coerce(a) * coerce(b)


def _simplify(v):
    if isinstance(v, CyclotomicNumber) and v.is_rational():
        return v.rational_value()
    return v


def _is_zero(v) -> bool:
    if isinstance(v, Rational):
        return v == 0
    return v.is_zero()


class Sequence:
    """Finitely supported map from the integer lattice to exact vectors."""

    __slots__ = ("dim", "width", "values")

    def __init__(self, dim: int, width: int, values=None) -> None:
        self.dim = dim
        self.width = width
        clean = {}
        for alpha, vec in (values or {}).items():
            alpha = tuple(int(x) for x in alpha)
            if len(alpha) != dim:
                raise ShapeMismatch("support point has wrong dimension")
            if any(isinstance(v, float) for v in vec):
                raise MaskforgeError("sequence values must be exact, not float")
            vec = tuple(_simplify(Fraction(v) if isinstance(v, (int, str)) else v)
                        for v in vec)
            if len(vec) != width:
                raise ShapeMismatch("value vector has wrong width")
            if not all(_is_zero(v) for v in vec):
                clean[alpha] = vec
        self.values = clean

    @classmethod
    def delta(cls, dim: int, width: int = 1, component: int = 0,
              at=None) -> "Sequence":
        at = tuple(at) if at is not None else (0,) * dim
        vec = tuple(Fraction(int(i == component)) for i in range(width))
        return cls(dim, width, {at: vec})

    def value(self, alpha):
        return self.values.get(tuple(alpha),
                               tuple(Fraction(0) for _ in range(self.width)))

    def support(self):
        return self.values.items()

    def is_zero(self) -> bool:
        return not self.values

    def sup_norm(self) -> Fraction:
        """Exact sup of component magnitudes; requires rational values."""
        best = Fraction(0)
        for vec in self.values.values():
            for v in vec:
                if not isinstance(v, Rational):
                    raise MaskforgeError("sup_norm needs rational values")
                best = max(best, abs(Fraction(v)))
        return best

    def __add__(self, other: "Sequence") -> "Sequence":
        if (self.dim, self.width) != (other.dim, other.width):
            raise ShapeMismatch("sequence shapes differ")
        out = dict(self.values)
        for alpha, vec in other.values.items():
            if alpha in out:
                out[alpha] = tuple(_plus(a, b) for a, b in zip(out[alpha], vec))
            else:
                out[alpha] = vec
        return Sequence(self.dim, self.width, out)

    def scale(self, factor) -> "Sequence":
        return Sequence(self.dim, self.width,
                        {a: tuple(_times(v, factor) for v in vec)
                         for a, vec in self.values.items()})

    def __sub__(self, other: "Sequence") -> "Sequence":
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        if (self.dim, self.width) != (other.dim, other.width):
            return False
        if set(self.values) != set(other.values):
            return False
        for alpha, vec in self.values.items():
            for a, b in zip(vec, other.values[alpha]):
                if not _is_zero(_plus(a, _times(b, -1))):
                    return False
        return True

    def __repr__(self) -> str:
        return f"Sequence(dim={self.dim}, width={self.width}, support={len(self.values)})"


class MatrixMask:
    """Rectangular array of integer-frequency masks with its coefficient view.

    coefficient(alpha)[i][j] is the coefficient of entry (i, j) at frequency
    alpha, so the symbol/coefficient round trip is exact by construction.
    """

    __slots__ = ("rows", "cols", "dim", "entries")

    def __init__(self, entries) -> None:
        self.entries = [list(row) for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0])
        if any(len(row) != self.cols for row in self.entries):
            raise ShapeMismatch("ragged matrix mask")
        self.dim = self.entries[0][0].dim
        for row in self.entries:
            for entry in row:
                entry._require_integer()
                if entry.dim != self.dim:
                    raise ShapeMismatch("mixed dimensions in matrix mask")

    @classmethod
    def from_scalar(cls, t: TrigPoly) -> "MatrixMask":
        return cls([[t]])

    @classmethod
    def from_decomposition(cls, dec: MaskDecomposition) -> "MatrixMask":
        """Difference-scheme symbol: row k, column j holds entry(j, k)."""
        d = dec.ctx.dim
        return cls([[dec.entry(j, k) for j in range(1, d + 1)]
                    for k in range(1, d + 1)])

    def entry(self, i: int, j: int) -> TrigPoly:
        return self.entries[i][j]

    def coefficient_support(self) -> set:
        out = set()
        for row in self.entries:
            for entry in row:
                out.update(entry.terms.keys())
        return out

    def coefficient(self, alpha) -> list:
        alpha = tuple(alpha)
        return [[entry.coefficient(alpha) for entry in row]
                for row in self.entries]

    def is_rational(self) -> bool:
        return all(c.is_rational() for row in self.entries
                   for entry in row for c in entry.terms.values())

    def matmul_dilated(self, other: "MatrixMask", dilation) -> "MatrixMask":
        """self(x) @ other(transpose(dilation) x)."""
        if self.cols != other.rows:
            raise ShapeMismatch("inner dimensions differ")
        dilated = [[entry.compose_dilate(dilation) for entry in row]
                   for row in other.entries]
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = TrigPoly.zero(self.dim)
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * dilated[k][j]
                row.append(acc)
            out.append(row)
        return MatrixMask(out)

    def __repr__(self) -> str:
        return f"MatrixMask({self.rows}x{self.cols}, dim={self.dim})"


def _as_matrix_mask(mask) -> MatrixMask:
    if isinstance(mask, TrigPoly):
        return MatrixMask.from_scalar(mask)
    return mask


def _dilation_matrix(dilation):
    if isinstance(dilation, DilationContext):
        return dilation.matrix
    return tuple(tuple(int(x) for x in row) for row in dilation)


def apply(mask, dilation, f: Sequence) -> Sequence:
    """One subdivision step: (S f)_alpha = sum A_(alpha - M beta) f_beta."""
    mask = _as_matrix_mask(mask)
    matrix = _dilation_matrix(dilation)
    if mask.cols != f.width:
        raise ShapeMismatch(f"mask expects width {mask.cols}, sequence has {f.width}")
    out: dict[tuple, list] = {}
    coeffs = {alpha: mask.coefficient(alpha) for alpha in mask.coefficient_support()}
    for beta, vec in f.support():
        m_beta = mat_vec(matrix, beta)
        for alpha, A in coeffs.items():
            target = tuple(a + b for a, b in zip(alpha, m_beta))
            contrib = []
            for i in range(mask.rows):
                acc = Fraction(0)
                for j in range(mask.cols):
                    if not _is_zero(vec[j]) and not A[i][j].is_zero():
                        acc = _plus(acc, _times(A[i][j], vec[j]))
                contrib.append(acc)
            if target in out:
                out[target] = [_plus(a, b) for a, b in zip(out[target], contrib)]
            else:
                out[target] = contrib
    return Sequence(f.dim, mask.rows, {a: tuple(v) for a, v in out.items()})


def gradient(f: Sequence) -> Sequence:
    """Backward-difference stack: for each input component, its d differences.

    Output width is d * width; block i (of size d) holds the differences of
    component i, difference axis fastest.
    """
    d = f.dim
    out: dict[tuple, list] = {}
    zero_vec = [Fraction(0)] * (d * f.width)
    for alpha, vec in f.support():
        for axis in range(d):
            shifted = tuple(a + int(i == axis) for i, a in enumerate(alpha))
            for target, sign in ((alpha, 1), (shifted, -1)):
                if target not in out:
                    out[target] = list(zero_vec)
                row = out[target]
                for i in range(f.width):
                    row[i * d + axis] = _plus(row[i * d + axis],
                                              _times(vec[i], sign))
    return Sequence(d, d * f.width, {a: tuple(v) for a, v in out.items()})


def coset_coefficient_sums(mask, ctx: DilationContext) -> list:
    """For each digit: the exact (signed) sum of coefficient matrices over its
    coset.  For a difference scheme of a normalized order-1 mask these all
    equal the inverse-transpose dilation matrix."""
    mask = _as_matrix_mask(mask)
    sums = [[[CyclotomicNumber.zero() for _ in range(mask.cols)]
             for _ in range(mask.rows)] for _ in range(ctx.m)]
    for alpha in mask.coefficient_support():
        nu = ctx.coset_index(alpha)
        A = mask.coefficient(alpha)
        for i in range(mask.rows):
            for j in range(mask.cols):
                sums[nu][i][j] = sums[nu][i][j] + A[i][j]
    return sums


def operator_norm(mask, dilation, precision_bits: int = 128) -> RatInterval:
    """The exact sup-operator norm: max over cosets of the max row sum of the
    entrywise coefficient-magnitude sums.

    Exact rational for rational coefficients, otherwise a certified interval.
    """
    mask = _as_matrix_mask(mask)
    matrix = _dilation_matrix(dilation)
    inverse = matrix_inverse(matrix)
    groups: dict[tuple, list] = {}
    for alpha in mask.coefficient_support():
        groups.setdefault(coset_fraction_key(inverse, alpha), []).append(alpha)
    best = RatInterval.exact(0)
    for alphas in groups.values():
        for i in range(mask.rows):
            row_sum = RatInterval.exact(0)
            for j in range(mask.cols):
                for alpha in alphas:
                    c = mask.entries[i][j].terms.get(alpha)
                    if c is None:
                        continue
                    if c.is_rational():
                        row_sum = row_sum + abs(c.rational_value())
                    else:
                        row_sum = row_sum + magnitude_interval(c, precision_bits)
            best = interval_max([best, row_sum])
    return best


def power_symbol(mask, dilation, k: int) -> MatrixMask:
    """Symbol of the k-fold operator: the ordered product of the mask with its
    images under increasing dilation powers.  The k-fold operator itself acts
    with dilation matrix^k."""
    if k < 1:
        raise ValueError("power must be at least 1")
    mask = _as_matrix_mask(mask)
    if mask.rows != mask.cols:
        raise ShapeMismatch("powers need a square mask")
    matrix = _dilation_matrix(dilation)
    out = mask
    step = matrix
    for _ in range(1, k):
        out = out.matmul_dilated(mask, step)
        step = mat_mul(step, matrix)
    return out


def power_norm_trajectory(mask, dilation, cap: int,
                          precision_bits: int = 128,
                          stop_below_one: bool = True):
    """Norms of the first `cap` operator powers; optionally stop at the first
    power certified below 1.  Returns list of (power, RatInterval)."""
    mask = _as_matrix_mask(mask)
    matrix = _dilation_matrix(dilation)
    out = []
    current = mask
    current_dilation = matrix
    for k in range(1, cap + 1):
        norm = operator_norm(current, current_dilation, precision_bits)
        out.append((k, norm))
        if stop_below_one and norm.certified_below(1):
            break
        if k < cap:
            current = current.matmul_dilated(mask, current_dilation)
            current_dilation = mat_mul(current_dilation, matrix)
    return out


def difference_scheme(t: TrigPoly, ctx: DilationContext,
                      order: int = 1) -> MatrixMask:
    """The matrix mask T with grad(S_t f) = S_T grad(f), from a decomposition
    refined to the given sum-rule order when order >= 2."""
    return MatrixMask.from_decomposition(decompose_to_class(t, ctx, order))


def second_difference_scheme(T: MatrixMask, ctx: DilationContext) -> MatrixMask:
    """The d^2-by-d^2 mask Q with grad(S_T g) = S_Q grad(g).

    Requires every entry of T in the order-0 sum-rule class; row blocks follow
    the gradient's component-major layout."""
    d = ctx.dim
    if (T.rows, T.cols) != (d, d):
        raise ShapeMismatch("second difference scheme needs a d-by-d mask")
    sub = [[decompose_mask(T.entry(k, j), ctx) for j in range(d)]
           for k in range(d)]
    entries = [[None] * (d * d) for _ in range(d * d)]
    for k in range(d):
        for kappa in range(d):
            for j in range(d):
                for iota in range(d):
                    entries[k * d + kappa][j * d + iota] = \
                        sub[k][j].entry(iota + 1, kappa + 1)
    return MatrixMask(entries)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    verdict: str                      # "convergent" | "inconclusive"
    mask_value_at_zero: CyclotomicNumber
    normalized: bool                  # t(0) == m
    sum_rule_order: int               # capped scan
    in_order0_class: bool
    certificate_power: int | None
    norms: list                       # [(L, RatInterval)]
    reasons: list
    decomposition: MaskDecomposition | None = field(repr=False, default=None)
    difference_mask: MatrixMask | None = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "mask_value_at_zero": self.mask_value_at_zero.to_json(),
            "normalized": self.normalized,
            "sum_rule_order": self.sum_rule_order,
            "in_order0_class": self.in_order0_class,
            "certificate_power": self.certificate_power,
            "norms": [{"power": L, "norm": n.to_json()} for L, n in self.norms],
            "reasons": self.reasons,
        }


def check_convergence(t: TrigPoly, ctx: DilationContext,
                      power_cap: int = DEFAULT_POWER_CAP,
                      precision_bits: int = 128,
                      order_scan_cap: int = 3) -> ConvergenceReport:
    """Sufficient-condition convergence verdict for a scalar mask.

    Gates: value m at the origin and order-0 sum rules; then the difference
    scheme must have some operator power with norm certified below 1.  The
    condition is sufficient, not necessary, so failures report "inconclusive".
    """
    reasons = []
    t0 = t.value_at_zero()
    normalized = t0 == ctx.m
    if not normalized:
        reasons.append(f"normalization failed: mask value at 0 is {t0!r}, not m={ctx.m}")
    order = sum_rule_order(t, ctx, cap=order_scan_cap)
    in_z0 = order >= 0
    if not in_z0:
        reasons.append("mask is not in the order-0 sum-rule class")
    dec = None
    T = None
    norms = []
    certificate = None
    if in_z0:
        dec = decompose_to_class(t, ctx, order)
        T = MatrixMask.from_decomposition(dec)
        norms = power_norm_trajectory(T, ctx, power_cap, precision_bits)
        for L, norm in norms:
            if norm.certified_below(1):
                certificate = L
                break
        if certificate is None:
            reasons.append(
                f"no operator power up to {power_cap} has norm certified below 1")
    verdict = "convergent" if (normalized and in_z0 and certificate) else "inconclusive"
    return ConvergenceReport(verdict=verdict, mask_value_at_zero=t0,
                             normalized=normalized, sum_rule_order=order,
                             in_order0_class=in_z0, certificate_power=certificate,
                             norms=norms, reasons=reasons, decomposition=dec,
                             difference_mask=T)


@dataclass
class SmoothnessReport:
    verdict: str                      # "C1" | "inconclusive"
    isotropy: IsotropyReport
    convergence: ConvergenceReport
    in_order1_class: bool
    certificate_power: int | None
    products: list                    # [(L, RatInterval of |Mt^L| * |S_Q^L|)]
    reasons: list
    difference_mask: MatrixMask | None = field(repr=False, default=None)
    second_difference_mask: MatrixMask | None = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "isotropy": self.isotropy.to_json(),
            "convergence": self.convergence.to_json(),
            "in_order1_class": self.in_order1_class,
            "certificate_power": self.certificate_power,
            "products": [{"power": L, "product": p.to_json()}
                         for L, p in self.products],
            "reasons": self.reasons,
        }


def check_c1(t: TrigPoly, ctx: DilationContext,
             power_cap: int = DEFAULT_POWER_CAP,
             precision_bits: int = 128) -> SmoothnessReport:
    """Sufficient-condition C1 verdict for a scalar mask.

    Gates: isotropic dilation, order-1 sum rules, normalization, a convergence
    certificate, then the contraction of the twice-differenced scheme against
    the growth of the transposed dilation powers.  Never claims C1 for a
    non-isotropic dilation: the argument that turns subconvergence of the
    difference scheme into C1 limits needs isotropy.
    """
    reasons = []
    isotropy = is_isotropic(ctx.matrix)
    if isotropy.verdict != "yes":
        reasons.append(f"dilation matrix is not certified isotropic "
                       f"(verdict: {isotropy.verdict})")
    convergence = check_convergence(t, ctx, power_cap, precision_bits)
    if convergence.verdict != "convergent":
        reasons.append("no convergence certificate")
    in_z1 = convergence.sum_rule_order >= 1
    if not in_z1:
        reasons.append("mask is not in the order-1 sum-rule class")
    T = convergence.difference_mask
    Q = None
    products = []
    certificate = None
    if in_z1 and T is not None:
        Q = second_difference_scheme(T, ctx)
        dual = transpose(ctx.matrix)
        current = Q
        current_dilation = ctx.matrix
        for L in range(1, power_cap + 1):
            growth = power_inf_norm(dual, L)
            norm = operator_norm(current, current_dilation, precision_bits)
            product = norm * growth
            products.append((L, product))
            if product.certified_below(1):
                certificate = L
                break
            if L < power_cap:
                current = current.matmul_dilated(Q, current_dilation)
                current_dilation = mat_mul(current_dilation, ctx.matrix)
        if certificate is None:
            reasons.append(
                f"no power up to {power_cap} contracts against the dilation growth")
    verdict = "C1" if (isotropy.verdict == "yes"
                       and convergence.verdict == "convergent"
                       and in_z1 and certificate) else "inconclusive"
    return SmoothnessReport(verdict=verdict, isotropy=isotropy,
                            convergence=convergence, in_order1_class=in_z1,
                            certificate_power=certificate, products=products,
                            reasons=reasons, difference_mask=T,
                            second_difference_mask=Q)


def refine(t: TrigPoly, ctx: DilationContext, f: Sequence,
           rounds: int) -> tuple[Sequence, list]:
    """Iterate the scheme and attach grid metadata: after the given number of
    rounds, the value at alpha approximates the limit at matrix^-rounds alpha."""
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    current = f
    for _ in range(rounds):
        current = apply(t, ctx, current)
    grid_map = matrix_power(ctx.inverse, rounds)
    points = [(tuple(mat_vec(grid_map, alpha)), vec)
              for alpha, vec in sorted(current.support())]
    return current, points
