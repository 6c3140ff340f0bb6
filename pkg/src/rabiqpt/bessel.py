"""Integer-order Bessel functions of the first kind.

Values for x > 2 come from Miller's backward recurrence normalised with
J_0 + 2 sum_k J_2k = 1; for x <= 2 the ascending power series is summed
directly. Both paths are accurate to ~1e-15 absolute on the supported
domain |n| <= 200, 0 <= x <= 50.
"""

import math

import numpy as np

from .errors import DomainError

MAX_ORDER = 200
MAX_ARG = 50.0
_SERIES_CUTOFF = 2.0
_RESCALE = 1e250


def _check(n, x):
    if not float(n).is_integer():
        raise DomainError(f"Bessel order must be an integer, got {n!r}")
    if abs(n) > MAX_ORDER:
        raise DomainError(f"|n| = {abs(n)} exceeds the supported maximum {MAX_ORDER}")
    if not (0.0 <= x <= MAX_ARG) or math.isnan(x):
        raise DomainError(f"x = {x!r} outside the supported interval [0, {MAX_ARG}]")


def _series(n, x):
    # sum_k (-1)^k (x/2)^(2k+n) / (k! (n+k)!)
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    half = 0.5 * x
    term = math.exp(n * (math.log(x) - math.log(2.0)) - math.lgamma(n + 1))
    total = term
    q = -half * half
    k = 1
    while True:
        term *= q / (k * (n + k))
        total += term
        if abs(term) < 1e-17 * abs(total) or term == 0.0:
            return total
        k += 1


def _miller(nmax, x):
    """Return J_0..J_nmax at x > 0 by backward recurrence."""
    start = max(nmax, int(x)) + 40 + int(math.sqrt(60.0 * max(nmax, x)))
    start += start % 2
    out = np.zeros(nmax + 1)
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            out /= _RESCALE
            norm /= _RESCALE
        # j_cur now holds the unnormalised J_{k-1}
        if k - 1 <= nmax:
            out[k - 1] = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return out / norm


def bessel_j_range(nmax, x):
    """J_n(x) for n = 0..nmax as a float array."""
    _check(nmax, x)
    nmax = int(abs(nmax))
    if x <= _SERIES_CUTOFF:
        return np.array([_series(n, float(x)) for n in range(nmax + 1)])
    return _miller(nmax, float(x))


def bessel_J(n, x):
    """Bessel function of the first kind J_n(x) for integer n.

    Parameters
    ----------
    n : int
        Order, |n| <= 200.
    x : float
        Argument, 0 <= x <= 50.

    Returns
    -------
    float

    Raises
    ------
    DomainError
        If (n, x) is outside the supported domain.
    """
    _check(n, x)
    n = int(n)
    m = abs(n)
    if x <= _SERIES_CUTOFF:
        val = _series(m, float(x))
    else:
        val = float(_miller(m, float(x))[m])
    if n < 0 and m % 2 == 1:
        return -val
    return val


def bessel_J_orders(orders, x):
    """Vectorised J_n(x) over an integer array of orders at a single x."""
    orders = np.asarray(orders, dtype=int)
    if orders.size == 0:
        return np.zeros(0)
    top = int(np.max(np.abs(orders)))
    table = bessel_j_range(top, x)
    vals = table[np.abs(orders)]
    flip = (orders < 0) & (np.abs(orders) % 2 == 1)
    vals[flip] = -vals[flip]
    return vals
