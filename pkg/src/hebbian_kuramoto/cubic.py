"""Real cubic polynomials: discriminant and closed-form roots."""
from __future__ import annotations

import cmath
import math

import numpy as np

__all__ = ["discriminant", "discriminant_scale", "has_three_real_roots", "roots", "polyval"]

# relative width of the band treated as a zero discriminant
DISC_RTOL = 1e-12


def discriminant(a, b, c, d):
    """Discriminant of ``a x^3 + b x^2 + c x + d``; works elementwise on arrays."""
    return 18 * a * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * a * c**3 - 27 * a**2 * d**2


def discriminant_scale(a, b, c, d):
    """Magnitude of the largest discriminant term, for relative comparisons."""
    terms = [
        np.abs(18 * a * b * c * d),
        np.abs(4 * b**3 * d),
        np.abs(b**2 * c**2),
        np.abs(4 * a * c**3),
        np.abs(27 * a**2 * d**2),
    ]
    return np.maximum.reduce(terms)


def has_three_real_roots(a, b, c, d, rtol: float = DISC_RTOL):
    """True where the cubic has three real roots, double roots included."""
    return discriminant(a, b, c, d) >= -rtol * discriminant_scale(a, b, c, d)


def polyval(coeffs, x):
    a, b, c, d = coeffs
    return ((a * x + b) * x + c) * x + d


def _newton(coeffs, x, iters: int = 2):
    a, b, c, _ = coeffs
    for _ in range(iters):
        fx = polyval(coeffs, x)
        dfx = (3 * a * x + 2 * b) * x + c
        if dfx == 0:
            break
        step = fx / dfx
        x_new = x - step
        if abs(polyval(coeffs, x_new)) >= abs(fx):
            break
        x = x_new
    return x


def roots(coeffs) -> list[complex]:
    """All three roots of a real cubic, sorted by (real part, imaginary part).

    Trigonometric form when the discriminant is positive, Cardano otherwise,
    then Newton polishing. When the discriminant sits inside the zero band the
    roots are returned as reals (a double root).
    """
    a, b, c, d = (float(v) for v in coeffs)
    if a == 0:
        raise ValueError("leading coefficient must be nonzero")
    shift = b / (3 * a)
    p = (3 * a * c - b * b) / (3 * a * a)
    q = (2 * b**3 - 9 * a * b * c + 27 * a * a * d) / (27 * a**3)
    three_real = bool(has_three_real_roots(a, b, c, d))
    r = 2 * math.sqrt(-p / 3) if p < 0 else 0.0
    if three_real and p * r != 0:  # p*r underflows only for a near-triple root
        arg = 3 * q / (p * r)  # = 3q/(2p) * sqrt(-3/p)
        theta = math.acos(max(-1.0, min(1.0, arg)))
        ts = [r * math.cos((theta - 2 * math.pi * k) / 3) for k in range(3)]
        xs = [_newton((a, b, c, d), t - shift) for t in ts]
        return sorted((complex(x, 0.0) for x in xs), key=lambda z: (z.real, z.imag))
    disc_dep = q * q / 4 + p**3 / 27
    sq = math.sqrt(max(disc_dep, 0.0))
    # larger-magnitude Cardano term avoids cancellation
    w = -q / 2 - math.copysign(sq, q)
    u = math.copysign(abs(w) ** (1 / 3), w)
    t = u - p / (3 * u) if u != 0 else 0.0
    x_real = _newton((a, b, c, d), t - shift, iters=3)
    # deflate: a x^3 + ... = (x - r)(a x^2 + B x + C)
    B = b + a * x_real
    C = c + B * x_real
    qd = B * B - 4 * a * C
    if three_real:
        sq2 = math.sqrt(max(qd, 0.0))
        others = [(-B - sq2) / (2 * a), (-B + sq2) / (2 * a)]
        others = [complex(_newton((a, b, c, d), x), 0.0) for x in others]
    else:
        s = cmath.sqrt(qd)
        others = [(-B - s) / (2 * a), (-B + s) / (2 * a)]
        others = [_newton((a, b, c, d), z) for z in others]
        if qd < 0:
            # keep the pair exactly conjugate
            z = others[0]
            others = [complex(z.real, -abs(z.imag)), complex(z.real, abs(z.imag))]
    out = [complex(x_real, 0.0)] + [complex(z) for z in others]
    return sorted(out, key=lambda z: (z.real, z.imag))
