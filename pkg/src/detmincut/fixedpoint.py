"""Deterministic fixed-point arithmetic with directed rounding.

Values are plain Python ints interpreted as v / 2**prec.  Everything here is
integer-only, so results are bit-identical across machines, thread counts and
reruns.  ``*_up`` variants never round below the true value, ``*_down``
variants never round above it; the gap is a handful of ulps and is what the
pessimistic-estimator bookkeeping charges against its precision budget.

ln/exp are computed via argument reduction (powers of two) plus short
atanh/Taylor series evaluated with guard bits.
"""

import os
from fractions import Fraction

DEFAULT_PRECISION = int(os.environ.get("DETMINCUT_PRECISION_BITS", "96"))

_GUARD = 32

# exp() arguments above this raise instead of building million-bit ints
_EXP_ARG_CAP = 512.0


class FixedPointOverflow(ArithmeticError):
    pass


def fxp_up(fr, prec):
    """Smallest fixed-point value >= fr."""
    fr = Fraction(fr)
    return -((-fr.numerator << prec) // fr.denominator)


def fxp_down(fr, prec):
    """Largest fixed-point value <= fr."""
    fr = Fraction(fr)
    return (fr.numerator << prec) // fr.denominator


def to_fraction(v, prec):
    return Fraction(v, 1 << prec)


def to_float(v, prec):
    return v / float(1 << prec)


def mul_up(a, b, prec):
    p = a * b
    return -((-p) >> prec)


def mul_down(a, b, prec):
    return (a * b) >> prec


def mul_frac_up(v, fr, prec):
    """ceil(v * fr) for nonnegative fixed-point v and positive Fraction fr."""
    return -((-v * fr.numerator) // fr.denominator)


def mul_frac_down(v, fr, prec):
    return (v * fr.numerator) // fr.denominator


def _ln_series(y, prec2):
    """(value, err_ulps) of ln(y) for fixed-point y in [1, 2) at prec2 bits.

    Uses ln(y) = 2*atanh(z), z = (y-1)/(y+1) in [0, 1/3); each squaring step
    truncates at most 1 ulp and z < 1/3 keeps propagated error below the
    per-step truncation, so 4 ulps per term is a safe overcount.
    """
    one = 1 << prec2
    num = y - one
    if num == 0:
        return 0, 0
    z = (num << prec2) // (y + one)
    z2 = (z * z) >> prec2
    total = 0
    zpow = z
    i = 0
    while zpow > 0:
        total += zpow // (2 * i + 1)
        zpow = (zpow * z2) >> prec2
        i += 1
        if i > prec2:
            break
    return 2 * total, 8 * i + 8


_LN2_CACHE = {}


def _ln2(prec2):
    """(value, err_ulps) for ln 2 = 2*atanh(1/3) at prec2 bits."""
    if prec2 not in _LN2_CACHE:
        one = 1 << prec2
        z = one // 3
        z2 = (z * z) >> prec2
        total = 0
        zpow = z
        i = 0
        while zpow > 0:
            total += zpow // (2 * i + 1)
            zpow = (zpow * z2) >> prec2
            i += 1
        _LN2_CACHE[prec2] = (2 * total, 8 * i + 8)
    return _LN2_CACHE[prec2]


def _ln_core(a, prec):
    """(value, err_ulps) at prec+_GUARD bits for ln(a), a > 0 fixed-point."""
    if a <= 0:
        raise ValueError("ln of nonpositive value")
    prec2 = prec + _GUARD
    v = a << _GUARD
    # normalize v = 2^k * y with y in [1, 2)
    k = v.bit_length() - 1 - prec2
    if k >= 0:
        y = v >> k
    else:
        y = v << (-k)
    s, err_s = _ln_series(y, prec2)
    l2, err_l2 = _ln2(prec2)
    val = s + k * l2
    err = err_s + abs(k) * err_l2 + abs(k) + 2
    return val, err


def ln_up(a, prec):
    val, err = _ln_core(a, prec)
    return -((-(val + err)) >> _GUARD)


def ln_down(a, prec):
    val, err = _ln_core(a, prec)
    return (val - err) >> _GUARD


def _exp_core(x, prec):
    """(value, err_ulps) at prec+_GUARD bits for e**x, fixed-point x."""
    prec2 = prec + _GUARD
    if x > 0 and x.bit_length() > prec + 16:
        raise FixedPointOverflow("exp argument exceeds cap")
    if x > 0 and x / float(1 << prec) > _EXP_ARG_CAP:
        raise FixedPointOverflow("exp argument exceeds cap")
    v = x << _GUARD
    l2, err_l2 = _ln2(prec2)
    # x = q*ln2 + r with r in [0, ln2); the truncation of ln2 leaks q*err_l2
    # ulps into r, which exp amplifies by at most e**r < 2
    q = v // l2
    r = v - q * l2
    one = 1 << prec2
    term = one
    total = one
    i = 1
    while term > 0:
        term = (term * r) >> prec2
        term //= i
        total += term
        i += 1
    err = 4 * i + 4 + 2 * abs(q) * err_l2 + 4
    # scale by 2^q (exact shift)
    if q >= 0:
        total <<= q
        err <<= q
    else:
        shift = -q
        if shift >= total.bit_length() + prec2:
            return 0, 2
        total = total >> shift
        err = (err >> shift) + 2
    return total, err


def exp_up(x, prec):
    val, err = _exp_core(x, prec)
    return max(1, -((-(val + err)) >> _GUARD))


def exp_down(x, prec):
    val, err = _exp_core(x, prec)
    return max(0, (val - err) >> _GUARD)


def pow_frac_up(base, exponent, prec):
    """Upper bound on base**exponent for Fractions base > 0, any exponent."""
    base = Fraction(base)
    exponent = Fraction(exponent)
    if exponent == 0:
        return 1 << prec
    prec2 = prec + _GUARD
    # round exponent*ln(base) up: take ln rounded away from the sign of E
    if exponent > 0:
        lnv = ln_up(fxp_up(base, prec2), prec2)
    else:
        lnv = ln_down(fxp_down(base, prec2), prec2)
    arg = -((-exponent.numerator * lnv) // exponent.denominator)
    v = exp_up(arg, prec2)
    return max(1, -((-v) >> _GUARD))


def pow_frac_down(base, exponent, prec):
    """Lower bound on base**exponent."""
    base = Fraction(base)
    exponent = Fraction(exponent)
    if exponent == 0:
        return 1 << prec
    prec2 = prec + _GUARD
    if exponent > 0:
        lnv = ln_down(fxp_down(base, prec2), prec2)
    else:
        lnv = ln_up(fxp_up(base, prec2), prec2)
    arg = (exponent.numerator * lnv) // exponent.denominator
    v = exp_down(arg, prec2)
    return max(0, v >> _GUARD)
