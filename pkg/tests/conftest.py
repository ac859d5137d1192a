import random
from fractions import Fraction

import pytest

from maskforge.cyclotomic import CyclotomicNumber
from maskforge.lattice import DilationContext
from maskforge.sumrules import (DerivativeTable, mask_from_derivative_table,
                                multi_indices_up_to)
from maskforge.trigpoly import TrigPoly

EXAMPLE_DILATION = ((0, 2), (2, -1))
EXAMPLE_DIGITS = ((0, 0), (1, 0), (0, 1), (1, 1))

# polyphase coefficients of the worked 2-d example mask, times 16
EXAMPLE_POLYPHASE_16 = [
    {(0, 0): 4, (1, 0): 4, (0, 1): 4, (1, 1): 4},
    {(0, 0): 5, (1, 0): 4, (-1, 0): 1, (0, 1): 2, (0, -1): 3, (1, 1): 1},
    {(0, 0): 4, (1, 0): 1, (-1, 0): 2, (0, 1): 5, (0, -1): 1, (1, 1): 3},
    {(0, 0): 5, (1, 0): 1, (-1, 0): 4, (0, 1): 1, (0, -1): 3, (1, 1): 1,
     (-1, 1): 1},
]


@pytest.fixture(scope="session")
def example_ctx() -> DilationContext:
    return DilationContext.create(EXAMPLE_DILATION, digits=EXAMPLE_DIGITS)


@pytest.fixture(scope="session")
def example_polyphase(example_ctx):
    return [TrigPoly(2, {f: Fraction(c, 16) for f, c in part.items()})
            for part in EXAMPLE_POLYPHASE_16]


@pytest.fixture(scope="session")
def example_mask(example_ctx, example_polyphase) -> TrigPoly:
    return TrigPoly.polyphase_assemble(example_polyphase, example_ctx)


def random_mask(rng: random.Random, dim: int, n_terms: int = 6,
                freq_range: int = 3, denom_cap: int = 8) -> TrigPoly:
    terms = {}
    for _ in range(n_terms):
        freq = tuple(rng.randint(-freq_range, freq_range) for _ in range(dim))
        terms[freq] = Fraction(rng.randint(-9, 9), rng.randint(1, denom_cap))
    return TrigPoly(dim, terms)


def random_class_mask(rng: random.Random, ctx: DilationContext,
                      order: int) -> TrigPoly:
    """Random mask satisfying the order-n sum rules with value m at 0."""
    values = {}
    for beta in multi_indices_up_to(ctx.dim, order):
        values[beta] = CyclotomicNumber.from_rational(
            Fraction(rng.randint(-6, 6), rng.randint(1, 4)))
    values[(0,) * ctx.dim] = CyclotomicNumber.from_rational(ctx.m)
    table = DerivativeTable(dim=ctx.dim, order=order, values=values)
    return mask_from_derivative_table(ctx, table)


def random_sequence(rng: random.Random, dim: int, width: int = 1,
                    n_points: int = 6, span: int = 4) -> "Sequence":
    from maskforge.subdivision import Sequence
    values = {}
    for _ in range(n_points):
        alpha = tuple(rng.randint(-span, span) for _ in range(dim))
        values[alpha] = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5))
                              for _ in range(width))
    return Sequence(dim, width, values)
