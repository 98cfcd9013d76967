"""JSON encodings shared by every module.

Exact scalars are written as ``"p/q"`` strings.  Float scalars are written as
``"<re>+<im>j"`` strings with as many significant digits as the working
precision carries, so a round trip at the same precision is lossless to
the last digit.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction

import mpmath

from .numeric import Polynomial, RationalFunction, scalar_domain, FLOAT

_COMPLEX = re.compile(r"^\s*([+-]?[0-9.]+(?:e[+-]?\d+)?)\s*([+-])\s*([0-9.]+(?:e[+-]?\d+)?)j\s*$")


def encode_scalar(x) -> str:
    if scalar_domain(x) == FLOAT:
        x = mpmath.mpc(x)
        digits = mpmath.mp.dps
        re_s = mpmath.nstr(x.real, digits)
        sign = "-" if x.imag < 0 else "+"
        im_s = mpmath.nstr(abs(x.imag), digits)
        return f"{re_s}{sign}{im_s}j"
    return str(Fraction(x))


def decode_scalar(text):
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"scalar must be a string, got {text!r}")
    m = _COMPLEX.match(text)
    if m:
        re_part = mpmath.mpf(m.group(1))
        im_part = mpmath.mpf(m.group(3))
        return mpmath.mpc(re_part, -im_part if m.group(2) == "-" else im_part)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a scalar: {text!r}") from exc


def encode_polynomial(p: Polynomial) -> list[str]:
    return [encode_scalar(c) for c in p.coeffs]


def decode_polynomial(data) -> Polynomial:
    if not isinstance(data, list):
        raise ValueError("polynomial must be a coefficient list")
    return Polynomial([decode_scalar(c) for c in data])


def encode_ratfun(r: RationalFunction) -> dict:
    return {"num": encode_polynomial(r.num), "den": encode_polynomial(r.den)}


def decode_ratfun(data) -> RationalFunction:
    if not isinstance(data, dict) or "num" not in data or "den" not in data:
        raise ValueError("rational function needs 'num' and 'den'")
    return RationalFunction(decode_polynomial(data["num"]), decode_polynomial(data["den"]))


def dumps(obj) -> str:
    """Deterministic JSON text (insertion-ordered keys, fixed separators)."""
    return json.dumps(obj, indent=2, ensure_ascii=False)
