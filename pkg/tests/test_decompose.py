import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from conftest import random_class_mask, random_mask
from maskforge.decompose import (MaskDecomposition, NotInZ0, decompose_mask,
                                 decompose_to_class, dilated_difference,
                                 iterated_decomposition, kronecker_power,
                                 refine_decomposition)
from maskforge.errors import NotInClass
from maskforge.lattice import DilationContext
from maskforge.sumrules import digit_interpolant, sum_rule_order_direct
from maskforge.trigpoly import TrigPoly

DATA = Path(__file__).parent / "data"


def load_printed_table():
    doc = json.loads((DATA / "printed_decomposition_table.json").read_text())
    table = {}
    for item in doc["entries"]:
        terms = {tuple(int(x) for x in key.split(",")): Fraction(val, 16)
                 for key, val in item["coefficients"].items()}
        table[(item["j"], item["k"], item["nu"])] = TrigPoly(2, terms)
    return table


def computed_polyphase_table(dec: MaskDecomposition):
    table = {}
    for j in (1, 2):
        for k in (1, 2):
            parts = dec.entry(j, k).polyphase_split(dec.ctx)
            for nu, part in enumerate(parts):
                table[(j, k, nu)] = part
    return table


def test_golden_table_against_print(example_ctx, example_mask):
    dec = decompose_mask(example_mask, example_ctx)
    ours = computed_polyphase_table(dec)
    printed = load_printed_table()
    allow = json.loads((DATA / "printed_table_allowlist.json").read_text())
    allowed = {(e["j"], e["k"], e["nu"]) for e in allow["entries"]}

    mismatches = {key for key in printed if ours[key] != printed[key]}
    assert mismatches == allowed, f"unexpected mismatches: {mismatches - allowed}"

    # arbiter: identity holds for our table, fails with the printed cell
    assert dec.identity_holds()
    for (j, k, nu) in mismatches:
        parts = dec.entry(j, k).polyphase_split(example_ctx)
        parts[nu] = printed[(j, k, nu)]
        tampered = [row[:] for row in dec.entries]
        tampered[j - 1][k - 1] = TrigPoly.polyphase_assemble(parts, example_ctx)
        bad = MaskDecomposition(source=example_mask, ctx=example_ctx,
                                entries=tampered, achieved_class=-1)
        assert not bad.identity_holds()
        assert not bad.value_constraint_holds()


def test_one_dimensional_decomposition():
    ctx = DilationContext.create([[2]])
    t = TrigPoly(1, {(0,): 1, (1,): 1})
    dec = decompose_mask(t, ctx)
    assert dec.entry(1, 1) == TrigPoly.constant(1, 1)
    assert dec.identity_holds()


def test_not_in_class_raises(example_ctx):
    rng = random.Random(17)
    raised = 0
    for _ in range(20):
        t = random_mask(rng, 2, n_terms=4)
        if t.is_zero():
            continue
        if sum_rule_order_direct(t, example_ctx, cap=0) < 0:
            with pytest.raises(NotInZ0):
                decompose_mask(t, example_ctx)
            raised += 1
        else:
            dec = decompose_mask(t, example_ctx)
            assert dec.identity_holds()
    assert raised > 0


def test_identity_and_values_random(example_ctx):
    rng = random.Random(23)
    for _ in range(10):
        t = random_class_mask(rng, example_ctx, 0)
        dec = decompose_mask(t, example_ctx)
        assert dec.identity_holds()
        assert dec.value_constraint_holds()


def test_order1_entries_land_in_order0(example_ctx):
    # entries of any decomposition of an order-1 mask are order-0, automatically
    rng = random.Random(29)
    for _ in range(6):
        t = random_class_mask(rng, example_ctx, 1)
        dec = decompose_mask(t, example_ctx)
        assert dec.achieved_class == 0
        for j in (1, 2):
            for k in (1, 2):
                assert sum_rule_order_direct(dec.entry(j, k), example_ctx,
                                             cap=0) >= 0


def test_refinement_lifts_entries(example_ctx):
    rng = random.Random(31)
    for order in (1, 2):
        t = random_class_mask(rng, example_ctx, order)
        dec = decompose_mask(t, example_ctx)
        refined = refine_decomposition(t, dec, example_ctx, order)
        assert refined.achieved_class == order - 1
        assert refined.identity_holds()
        assert refined.value_constraint_holds()
        for j in (1, 2):
            for k in (1, 2):
                assert sum_rule_order_direct(refined.entry(j, k), example_ctx,
                                             cap=order - 1) >= order - 1


def test_refinement_requires_class(example_ctx, example_mask):
    dec = decompose_mask(example_mask, example_ctx)
    with pytest.raises(NotInClass):
        refine_decomposition(example_mask, dec, example_ctx, 2)


def test_refinement_matches_two_dimensional_specialization(example_ctx):
    # independent transcription of the displayed two-entry update for d=2,
    # order target 2: corrections move the second-axis first-derivative
    # residues of row 1 using the digit interpolants
    rng = random.Random(37)
    ctx = example_ctx
    t = random_class_mask(rng, ctx, 2)
    dec = decompose_mask(t, ctx)

    entries = [[dec.entry(1, 1), dec.entry(1, 2)],
               [dec.entry(2, 1), dec.entry(2, 2)]]
    delta = [dilated_difference(ctx, 1), dilated_difference(ctx, 2)]
    for k in (1, 2):
        a_1k = entries[0][k - 1].compose_inverse_dilate(ctx.inverse)
        correction = TrigPoly.zero(2)
        for nu in range(1, ctx.m):
            w = a_1k.normalized_derivative((0, 1), ctx.dual_digits[nu])
            correction = correction + digit_interpolant(nu, ctx).scale(w)
        entries[0][k - 1] = entries[0][k - 1] + delta[1] * correction
        entries[1][k - 1] = entries[1][k - 1] - delta[0] * correction

    refined = refine_decomposition(t, dec, ctx, 2)
    for j in (1, 2):
        for k in (1, 2):
            assert refined.entry(j, k) == entries[j - 1][k - 1]


def test_kronecker_power_examples():
    a = [[1, 2], [3, 4]]
    assert kronecker_power(a, 0) == ((Fraction(1),),)
    assert kronecker_power(a, 1) == ((1, 2), (3, 4))
    assert kronecker_power(a, 2)[0] == (1, 2, 2, 4)
    eye = [[1, 0], [0, 1]]
    k3 = kronecker_power(eye, 3)
    assert all(k3[i][j] == (1 if i == j else 0) for i in range(8)
               for j in range(8))


def test_iterated_base_case_matches_single(example_ctx):
    rng = random.Random(41)
    t = random_class_mask(rng, example_ctx, 1)
    single = decompose_to_class(t, example_ctx, 1)
    nested = iterated_decomposition(t, example_ctx, 1, 2)
    for j in (1, 2):
        for k in (1, 2):
            assert nested.entry((j,), (k,)) == single.entry(j, k)


def test_iterated_depth_two(example_ctx):
    rng = random.Random(43)
    t = random_class_mask(rng, example_ctx, 1)
    nested = iterated_decomposition(t, example_ctx, 2, 2)
    assert nested.identity_holds()
    assert nested.value_constraint_holds()
    # value form of the Kronecker statement at depth 2
    kron = kronecker_power(example_ctx.dual_inverse, 2)
    tuples = nested.axis_tuples()
    t0 = t.value_at_zero()
    matrix = nested.symbol_matrix()
    for r, k_tuple in enumerate(tuples):
        for c, j_tuple in enumerate(tuples):
            assert matrix[r][c].value_at_zero() == t0 * kron[r][c]


def test_iterated_class_guarantee(example_ctx):
    rng = random.Random(47)
    t = random_class_mask(rng, example_ctx, 2)
    nested = iterated_decomposition(t, example_ctx, 2, 3)
    assert nested.class_guarantee == 0
    for entry in nested.entries.values():
        assert sum_rule_order_direct(entry, example_ctx, cap=0) >= 0


def test_iterated_rejects_shallow_mask(example_ctx, example_mask):
    with pytest.raises(NotInClass):
        iterated_decomposition(example_mask, example_ctx, 2, 2)


def test_decomposition_json_round_trip(example_ctx, example_mask):
    from maskforge.maskfile import mask_terms_from_json
    dec = decompose_mask(example_mask, example_ctx)
    doc = dec.to_json()
    rebuilt = {}
    for item in doc["entries"]:
        rebuilt[(item["j"][0], item["k"][0])] = \
            mask_terms_from_json(item["mask"], 2)
    for j in (1, 2):
        for k in (1, 2):
            assert rebuilt[(j, k)] == dec.entry(j, k)
