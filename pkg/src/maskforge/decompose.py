"""Constructive decompositions of masks against difference factors.

The basic object: for a mask t satisfying order-0 sum rules, a d-by-d array
of masks t_jk with, for every axis k,

    (1 - e^(2*pi*i*(x, e_k))) t(x)
        = sum_j t_jk(x) (1 - e^(2*pi*i*(Mt x, e_j))),     (Mt = transpose)

computed through the polyphase components and a fixed telescoping division
sweep along the axes.  A refinement pass lifts the entries' sum-rule order one
step at a time by moving explicitly constructed corrections between rows
without changing the defining sums, and an iterated form indexes repeated
decompositions by tuples of axes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import InternalIdentityViolation, NotInClass
from .lattice import DilationContext, mat_vec
from .sumrules import (multi_indices, sum_rule_order, sum_rule_order_direct,
                       digit_interpolant, unit_derivative_poly)
from .trigpoly import TrigPoly


class NotInZ0(NotInClass):
    """The mask fails even the order-0 sum rules, so no decomposition exists."""


def _unit(dim: int, axis: int) -> tuple[int, ...]:
    """Unit vector for a 1-based axis."""
    return tuple(int(i == axis - 1) for i in range(dim))


def plain_difference(dim: int, axis: int) -> TrigPoly:
    """1 - e^(2*pi*i*(x, e_axis))."""
    return TrigPoly.one_minus_exp(dim, _unit(dim, axis))


def dilated_difference(ctx: DilationContext, axis: int) -> TrigPoly:
    """1 - e^(2*pi*i*(transpose(matrix) x, e_axis))."""
    return TrigPoly.one_minus_exp(ctx.dim, mat_vec(ctx.matrix, _unit(ctx.dim, axis)))


@dataclass
class MaskDecomposition:
    """Entries entry(j, k) with axes numbered from 1; j is the dilated-factor
    index, k the plain-factor index."""
    source: TrigPoly
    ctx: DilationContext
    entries: list           # entries[j-1][k-1] -> TrigPoly
    achieved_class: int

    def entry(self, j: int, k: int) -> TrigPoly:
        return self.entries[j - 1][k - 1]

    def identity_holds(self) -> bool:
        """Exact check of the defining identity for every axis k."""
        d = self.ctx.dim
        for k in range(1, d + 1):
            lhs = plain_difference(d, k) * self.source
            rhs = TrigPoly.zero(d)
            for j in range(1, d + 1):
                rhs = rhs + self.entry(j, k) * dilated_difference(self.ctx, j)
            if lhs != rhs:
                return False
        return True

    def value_constraint_holds(self) -> bool:
        """entry(j,k) at 0 must equal inverse[j][k] times the mask's value at 0."""
        t0 = self.source.value_at_zero()
        for j in range(1, self.ctx.dim + 1):
            for k in range(1, self.ctx.dim + 1):
                want = t0 * self.ctx.inverse[j - 1][k - 1]
                if self.entry(j, k).value_at_zero() != want:
                    return False
        return True

    def to_json(self) -> dict:
        from .maskfile import mask_terms_json
        return {
            "order": 1,
            "achieved_class": self.achieved_class,
            "entries": [{"j": [j], "k": [k],
                         "mask": mask_terms_json(self.entry(j, k))}
                        for j in range(1, self.ctx.dim + 1)
                        for k in range(1, self.ctx.dim + 1)],
        }


def decompose_mask(t: TrigPoly, ctx: DilationContext) -> MaskDecomposition:
    """Decompose an order-0 mask through its polyphase components.

    For each plain axis k and coset nu, the shifted polyphase matching the
    coset of digit_nu - e_k is subtracted, and the difference is split along
    the fixed axis sweep 1..d by exact division; assembling the pieces gives
    the entries.  Deterministic given the context's digit order.
    """
    if sum_rule_order(t, ctx, cap=0) < 0:
        raise NotInZ0("mask is not in the order-0 sum-rule class")
    d = ctx.dim
    taus = t.polyphase_split(ctx)
    # per-entry polyphase tables, indexed [j-1][k-1][nu]
    tables = [[[None] * ctx.m for _ in range(d)] for _ in range(d)]
    for k in range(1, d + 1):
        e_k = _unit(d, k)
        for nu in range(ctx.m):
            shifts = []
            for n in range(ctx.m):
                cand = tuple(e_k[i] - ctx.digits[nu][i] + ctx.digits[n][i]
                             for i in range(d))
                image = mat_vec(ctx.inverse, cand)
                if all(x.denominator == 1 for x in image):
                    shifts.append((n, tuple(int(x) for x in image)))
            if len(shifts) != 1:
                raise InternalIdentityViolation(
                    f"digit translation not unique for k={k}, nu={nu}")
            n_star, shift = shifts[0]
            diff = taus[nu] - TrigPoly.monomial(d, shift) * taus[n_star]
            remaining = diff
            for j in range(1, d + 1):
                collapsed = remaining.substitute_one(j)
                tables[j - 1][k - 1][nu] = \
                    (remaining - collapsed).divide_one_minus_z(j)
                remaining = collapsed
            if not remaining.is_zero():
                raise InternalIdentityViolation(
                    "telescoping left a nonzero constant")  # blocked by the Z0 gate
    entries = [[TrigPoly.polyphase_assemble(tables[j][k], ctx)
                for k in range(d)] for j in range(d)]
    dec = MaskDecomposition(source=t, ctx=ctx, entries=entries, achieved_class=-1)
    if not dec.identity_holds():
        raise InternalIdentityViolation("decomposition identity failed")
    if not dec.value_constraint_holds():
        raise InternalIdentityViolation("origin value constraint failed")
    if all(sum_rule_order_direct(entry, ctx, cap=0) >= 0
           for row in entries for entry in row):
        dec.achieved_class = 0
    return dec


def _correction_block(a_row: TrigPoly, ctx: DilationContext, order: int,
                      l: int, j: int) -> TrigPoly:
    """Sum of the explicit corrections moving order-`order` residues of row l
    into row j (axes 1-based, j > l).

    Each correction is  -(1/beta_j) * G(Mt x) * sum_nu H_nu(x) * w(beta, nu)
    where G selects the (beta - e_j)-th normalized derivative through order
    order-1, H_nu interpolates the dual digits, and w is the normalized beta
    derivative of the dilated row entry at dual digit nu.  The 2*pi*i powers
    of the three factors cancel exactly, which keeps everything cyclotomic;
    the 1/beta_j factor makes the moved residue match the derivative it kills
    (the product rule contributes beta_j through the single surviving term).
    """
    d = ctx.dim
    total = TrigPoly.zero(d)
    interpolants = [digit_interpolant(nu, ctx) for nu in range(ctx.m)]
    for beta in multi_indices(d, order):
        if beta[j - 1] == 0:
            continue
        if any(beta[i - 1] for i in range(l + 1, j)):
            continue
        weight_sum = TrigPoly.zero(d)
        for nu in range(1, ctx.m):
            w = a_row.normalized_derivative(beta, ctx.dual_digits[nu])
            if not w.is_zero():
                weight_sum = weight_sum + interpolants[nu].scale(w)
        if weight_sum.is_zero():
            continue
        reduced = tuple(b - int(i == j - 1) for i, b in enumerate(beta))
        selector = unit_derivative_poly(order - 1, reduced, d) \
            .compose_dilate(ctx.matrix)
        total = total + (selector * weight_sum).scale(Fraction(-1, beta[j - 1]))
    return total


def refine_decomposition(t: TrigPoly, dec: MaskDecomposition, ctx: DilationContext,
                         target_order: int) -> MaskDecomposition:
    """Lift a decomposition of a mask with order-N sum rules (N = target_order)
    so every entry satisfies the order-(N-1) sum rules.

    One pass per order n = 1..N-1; within a pass, rows are fixed left to
    right, each step exchanging corrections between row l and the later rows
    while preserving the defining sums exactly (checked, as a bug guard).
    """
    n_cap = target_order
    if sum_rule_order(t, ctx, cap=n_cap) < n_cap:
        raise NotInClass(f"mask does not satisfy the order-{n_cap} sum rules")
    d = ctx.dim
    if n_cap <= 1 or d == 1:
        # entries of an order-1 mask are already order-0; nothing to move
        if d == 1 and n_cap >= 2:
            # the single entry inherits the full order drop automatically
            achieved = min(sum_rule_order_direct(dec.entry(1, 1), ctx, cap=n_cap - 1),
                           n_cap - 1)
            if achieved < n_cap - 1:
                raise InternalIdentityViolation(
                    "one-dimensional entry fell short of its guaranteed order")
            return MaskDecomposition(t, ctx, dec.entries, achieved)
        return dec
    entries = [[dec.entry(j, k) for k in range(1, d + 1)] for j in range(1, d + 1)]
    deltas = [dilated_difference(ctx, j) for j in range(1, d + 1)]
    for order in range(1, n_cap):
        for l in range(1, d):
            before = [None] * d
            for k in range(1, d + 1):
                before[k - 1] = _defining_sum(entries, deltas, d, k)
            for k in range(1, d + 1):
                a_row = entries[l - 1][k - 1].compose_inverse_dilate(ctx.inverse)
                for j in range(l + 1, d + 1):
                    block = _correction_block(a_row, ctx, order, l, j)
                    if block.is_zero():
                        continue
                    entries[l - 1][k - 1] = entries[l - 1][k - 1] \
                        - deltas[j - 1] * block
                    entries[j - 1][k - 1] = entries[j - 1][k - 1] \
                        + deltas[l - 1] * block
            for k in range(1, d + 1):
                if _defining_sum(entries, deltas, d, k) != before[k - 1]:
                    raise InternalIdentityViolation(
                        f"row exchange changed the defining sum at k={k}")
    result = MaskDecomposition(source=t, ctx=ctx, entries=entries,
                               achieved_class=n_cap - 1)
    if not result.identity_holds() or not result.value_constraint_holds():
        raise InternalIdentityViolation("refined decomposition lost its identity")
    for row in entries:
        for entry in row:
            if sum_rule_order(entry, ctx, cap=n_cap - 1) < n_cap - 1:
                raise InternalIdentityViolation(
                    "refined entry fell short of its guaranteed order")
    return result


def _defining_sum(entries, deltas, d: int, k: int) -> TrigPoly:
    acc = TrigPoly.zero(d)
    for j in range(1, d + 1):
        acc = acc + entries[j - 1][k - 1] * deltas[j - 1]
    return acc


def decompose_to_class(t: TrigPoly, ctx: DilationContext,
                       source_order: int) -> MaskDecomposition:
    """Decompose a mask with order-`source_order` sum rules so the entries
    carry order source_order - 1 (refining when source_order >= 2)."""
    dec = decompose_mask(t, ctx)
    if source_order >= 2:
        dec = refine_decomposition(t, dec, ctx, source_order)
    return dec


# ---------------------------------------------------------------------------
# iterated form
# ---------------------------------------------------------------------------

def kronecker_power(matrix, n: int):
    """n-th Kronecker power; entries may be int, Fraction, or anything with
    ring arithmetic."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    result = ((Fraction(1),),)
    for _ in range(n):
        rows = len(result)
        cols = len(result[0])
        out = []
        for i in range(len(matrix)):
            for r in range(rows):
                row = []
                for j in range(len(matrix[0])):
                    for c in range(cols):
                        row.append(matrix[i][j] * result[r][c])
                out.append(tuple(row))
        result = tuple(out)
    return result


@dataclass
class IteratedDecomposition:
    """Entries indexed by pairs of axis tuples of the given length."""
    source: TrigPoly
    ctx: DilationContext
    order: int
    entries: dict            # (j_tuple, k_tuple) -> TrigPoly
    class_guarantee: int

    def entry(self, j_tuple, k_tuple) -> TrigPoly:
        return self.entries[(tuple(j_tuple), tuple(k_tuple))]

    def axis_tuples(self):
        return list(itertools.product(range(1, self.ctx.dim + 1),
                                      repeat=self.order))

    def identity_holds(self) -> bool:
        """Exact check of the length-n product identity for every axis tuple."""
        d = self.ctx.dim
        for k_tuple in self.axis_tuples():
            lhs = self.source
            for k in k_tuple:
                lhs = lhs * plain_difference(d, k)
            rhs = TrigPoly.zero(d)
            for j_tuple in self.axis_tuples():
                term = self.entries[(j_tuple, k_tuple)]
                for j in j_tuple:
                    term = term * dilated_difference(self.ctx, j)
                rhs = rhs + term
            if lhs != rhs:
                return False
        return True

    def value_constraint_holds(self) -> bool:
        """Entry values at 0 are products of inverse-matrix entries times t(0)."""
        t0 = self.source.value_at_zero()
        for (j_tuple, k_tuple), entry in self.entries.items():
            factor = Fraction(1)
            for j, k in zip(j_tuple, k_tuple):
                factor *= self.ctx.inverse[j - 1][k - 1]
            if entry.value_at_zero() != t0 * factor:
                return False
        return True

    def symbol_matrix(self) -> list:
        """d^n-by-d^n array with rows indexed by the plain tuples and columns
        by the dilated tuples (Kronecker-power index order)."""
        tuples = self.axis_tuples()
        return [[self.entries[(j_tuple, k_tuple)] for j_tuple in tuples]
                for k_tuple in tuples]

    def to_json(self) -> dict:
        from .maskfile import mask_terms_json
        return {
            "order": self.order,
            "achieved_class": self.class_guarantee,
            "entries": [{"j": list(j_tuple), "k": list(k_tuple),
                         "mask": mask_terms_json(entry)}
                        for (j_tuple, k_tuple), entry in sorted(self.entries.items())],
        }


def iterated_decomposition(t: TrigPoly, ctx: DilationContext, levels: int,
                           source_order: int) -> IteratedDecomposition:
    """Repeatedly decompose, indexing entries by axis tuples of length
    `levels`.

    Requires the mask to satisfy order-(source_order - 1) sum rules with
    levels <= source_order; entries then satisfy the order
    source_order - levels - 1 rules (when that is nonnegative; verified).
    Recursion peels the last tuple position: the level-(i-1) entries, each one
    order lower, are decomposed again.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    if levels > source_order:
        raise NotInClass("levels may not exceed the source order")
    have = sum_rule_order(t, ctx, cap=max(source_order - 1, 0))
    if have < source_order - 1:
        raise NotInClass(
            f"mask has sum-rule order {have}, below {source_order - 1}")
    entries = {((), ()): t}
    for level in range(1, levels + 1):
        current_class = source_order - level
        new_entries = {}
        for (j_prefix, k_prefix), poly in entries.items():
            dec = decompose_to_class(poly, ctx, current_class)
            for j in range(1, ctx.dim + 1):
                for k in range(1, ctx.dim + 1):
                    new_entries[(j_prefix + (j,), k_prefix + (k,))] = dec.entry(j, k)
        entries = new_entries
    result = IteratedDecomposition(source=t, ctx=ctx, order=levels,
                                   entries=entries,
                                   class_guarantee=source_order - levels - 1)
    if not result.identity_holds():
        raise InternalIdentityViolation("iterated identity failed")
    if not result.value_constraint_holds():
        raise InternalIdentityViolation("iterated value constraint failed")
    if result.class_guarantee >= 0:
        for entry in entries.values():
            if sum_rule_order_direct(entry, ctx, cap=result.class_guarantee) \
                    < result.class_guarantee:
                raise InternalIdentityViolation(
                    "iterated entry fell short of its guaranteed order")
    return result
