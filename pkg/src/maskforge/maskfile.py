"""Mask file parsing and serialization.

Masks travel as JSON with exact values only: rationals are decimal-free
"p/q" strings (or JSON integers), cyclotomic values are
{"order": N, "coords": ["p/q", ...]}.  A mask file carries the dilation
matrix, optional digit sets, and exactly one of a coefficient list or a
per-digit polyphase list.  Sequences travel as CSV with integer lattice
columns followed by "p/q" value columns.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction

from .cyclotomic import CyclotomicNumber
from .errors import MaskforgeError
from .lattice import DilationContext
from .subdivision import Sequence
from .trigpoly import TrigPoly


class ParseError(MaskforgeError):
    pass


def format_rational(value) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(value) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"rational values must be exact, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational {value!r}: {exc}") from None
    raise ParseError(f"cannot parse rational from {value!r}")


def parse_scalar(value):
    """A coefficient: rational string/int, or a cyclotomic object."""
    if isinstance(value, dict):
        try:
            order = int(value["order"])
            coords = [parse_rational(c) for c in value["coords"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad cyclotomic object {value!r}: {exc}") from None
        return CyclotomicNumber(order, coords)
    return parse_rational(value)


def scalar_to_json(value):
    if isinstance(value, CyclotomicNumber):
        return value.to_json()
    return format_rational(value)


def mask_terms_json(t: TrigPoly) -> dict:
    if t.denom != 1:
        raise MaskforgeError("only integer-frequency masks serialize")
    return {"coefficients": [{"freq": list(freq), "value": t.terms[freq].to_json()}
                             for freq in sorted(t.terms)]}


def mask_terms_from_json(payload: dict, dim: int) -> TrigPoly:
    terms = {}
    for item in payload.get("coefficients", []):
        freq = tuple(int(x) for x in item["freq"])
        if len(freq) != dim:
            raise ParseError(f"frequency {freq} has wrong dimension")
        terms[freq] = parse_scalar(item["value"])
    return TrigPoly(dim, terms)


def load_mask_document(doc: dict) -> tuple[TrigPoly, DilationContext]:
    """Build the mask and its dilation context from a parsed mask file."""
    try:
        dim = int(doc["dim"])
        dilation = [[int(x) for x in row] for row in doc["dilation"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad mask header: {exc}") from None
    if len(dilation) != dim or any(len(r) != dim for r in dilation):
        raise ParseError("dilation matrix shape does not match dim")
    digits = doc.get("digits")
    dual_digits = doc.get("dual_digits")
    if digits is not None:
        digits = [tuple(int(x) for x in d) for d in digits]
    if dual_digits is not None:
        dual_digits = [tuple(int(x) for x in d) for d in dual_digits]
    ctx = DilationContext.create(dilation, digits=digits, dual_digits=dual_digits)

    has_coeffs = "coefficients" in doc
    has_polyphase = "polyphase" in doc
    if has_coeffs == has_polyphase:
        raise ParseError("mask file needs exactly one of coefficients/polyphase")
    if has_coeffs:
        mask = mask_terms_from_json(doc, ctx.dim)
        if mask.is_zero():
            raise ParseError("mask has no nonzero coefficients")
        return mask, ctx
    if digits is None:
        raise ParseError("polyphase form requires an explicit digit list")
    parts = [TrigPoly.zero(ctx.dim) for _ in range(ctx.m)]
    seen = set()
    for item in doc["polyphase"]:
        try:
            nu = int(item["digit"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad polyphase item: {exc}") from None
        if not 0 <= nu < ctx.m or nu in seen:
            raise ParseError(f"bad polyphase digit index {nu}")
        seen.add(nu)
        parts[nu] = mask_terms_from_json(item, ctx.dim)
    mask = TrigPoly.polyphase_assemble(parts, ctx)
    if mask.is_zero():
        raise ParseError("mask has no nonzero coefficients")
    return mask, ctx


def load_mask_file(path, digits_override=None) -> tuple[TrigPoly, DilationContext]:
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read mask file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("mask file must hold a JSON object")
    if digits_override is not None:
        doc = dict(doc)
        doc.update(digits_override)
    return load_mask_document(doc)


def mask_document(mask: TrigPoly, ctx: DilationContext) -> dict:
    doc = {"dim": ctx.dim, "dilation": [list(r) for r in ctx.matrix],
           "digits": [list(d) for d in ctx.digits],
           "dual_digits": [list(d) for d in ctx.dual_digits]}
    doc.update(mask_terms_json(mask))
    return doc


# ---------------------------------------------------------------------------
# sequence CSV
# ---------------------------------------------------------------------------

def read_sequence_csv(path, dim: int) -> Sequence:
    """Rows: dim integer columns, then the value columns as exact rationals."""
    values = {}
    width = None
    try:
        with open(path, newline="") as handle:
            for row in csv.reader(handle):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) <= dim:
                    raise ParseError(f"row {row!r} is too short for dim={dim}")
                try:
                    alpha = tuple(int(cell) for cell in row[:dim])
                except ValueError as exc:
                    raise ParseError(f"bad lattice point in {row!r}: {exc}") from None
                vec = tuple(parse_rational(cell) for cell in row[dim:])
                if width is None:
                    width = len(vec)
                elif len(vec) != width:
                    raise ParseError("rows have inconsistent value widths")
                values[alpha] = vec
    except OSError as exc:
        raise ParseError(f"cannot read sequence file {path}: {exc}") from None
    if width is None:
        raise ParseError("sequence file is empty")
    return Sequence(dim, width, values)


def write_sequence_csv(path, seq: Sequence) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for alpha, vec in sorted(seq.support()):
            writer.writerow([*alpha, *(format_rational(v) for v in vec)])


def write_refined_csv(path, points) -> None:
    """Rows: rational grid columns, then value columns."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for grid, vec in points:
            writer.writerow([*(format_rational(g) for g in grid),
                             *(format_rational(v) for v in vec)])
