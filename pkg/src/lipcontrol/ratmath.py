"""Integer and rational helpers used by the exact kernels."""

from __future__ import annotations

from fractions import Fraction


def iroot_floor(n: int, k: int) -> int:
    """Largest integer r with r**k <= n (n >= 0, k >= 1)."""
    if n < 0:
        raise ValueError("negative radicand")
    if k < 1:
        raise ValueError("root order must be positive")
    if n == 0:
        return 0
    if k == 1:
        return n
    r = 1 << ((n.bit_length() + k - 1) // k)  # upper seed
    while True:
        nxt = ((k - 1) * r + n // r ** (k - 1)) // k
        if nxt >= r:
            break
        r = nxt
    while r ** k > n:
        r -= 1
    return r


def frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def frac_ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def ceil_root_of_fraction(x: Fraction, k: int) -> int:
    """Smallest integer q with q**k >= x (x >= 0)."""
    if x < 0:
        raise ValueError("negative radicand")
    q = iroot_floor(x.numerator // x.denominator, k)
    while q ** k * x.denominator < x.numerator:
        q += 1
    return q


def dyadic_upper_root(x: Fraction, k: int, bits: int = 40) -> Fraction:
    """Smallest rational of the form q / 2**bits that is >= x**(1/k)."""
    scaled = x * Fraction(2 ** (bits * k))
    q = ceil_root_of_fraction(scaled, k)
    return Fraction(q, 2 ** bits)


def dyadic_floor_root_int(n: int, k: int, bits: int) -> Fraction:
    """Largest rational q / 2**bits with (q / 2**bits)**k <= n (n >= 0)."""
    if n < 0:
        raise ValueError("negative radicand")
    q = iroot_floor(n << (bits * k), k)
    return Fraction(q, 2 ** bits)
