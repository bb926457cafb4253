"""Bessel functions of the first kind for integer order and real argument.

Two evaluation routes are used:

* the ascending power series, when its terms decrease from the first one on
  (``x**2 / 4 <= |n| + 1``), so no cancellation can occur;
* Miller's backward recurrence started well above ``max(|n|, |x|)`` and
  normalised with ``J_0 + 2 * sum_k J_2k = 1``.

Truncation of the infinite Bessel sums used elsewhere in the package goes
through :func:`truncation_order`.
"""

import math

import numpy as np

from .errors import DomainError

MAX_ORDER = 10_000
SUM_TOL = 1e-14
_RESCALE = 1e250


def _check_x(x):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Bessel argument must be finite, got {x!r}")
    return x


def _series(n, x):
    """Ascending series for J_n(x), n >= 0."""
    half = 0.5 * x
    if half == 0.0:
        return 1.0 if n == 0 else 0.0
    log_first = n * math.log(abs(half)) - math.lgamma(n + 1)
    if log_first < -745.0:
        return 0.0
    term = math.exp(log_first)
    if half < 0 and n % 2:
        term = -term
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (n + k))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def _miller_start(nmax, ax):
    start = max(nmax, int(math.ceil(ax))) + 20 + int(math.ceil(15.0 * ax ** (1.0 / 3.0)))
    return start + (start % 2)


def _miller(nmax, x):
    """J_0..J_nmax at x > 0 by backward recurrence."""
    start = _miller_start(nmax, x)
    out = np.zeros(nmax + 1)
    two_over_x = 2.0 / x
    j_next, j_cur = 0.0, 1.0
    norm = 0.0
    for k in range(start, 0, -1):
        # j_cur holds J_k (unnormalised); step down to J_{k-1}
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if k - 1 <= nmax:
            out[k - 1] = j_cur
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            out /= _RESCALE
    norm += j_cur
    return out / norm


def bessel_j_orders(nmax, x):
    """Return ``[J_0(x), ..., J_nmax(x)]`` as a float array."""
    nmax = int(nmax)
    if nmax < 0:
        raise DomainError("nmax must be non-negative")
    if nmax > MAX_ORDER:
        raise DomainError(f"order {nmax} exceeds supported maximum {MAX_ORDER}")
    x = _check_x(x)
    ax = abs(x)
    if ax == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    if ax <= 2.0:
        out = np.array([_series(n, ax) for n in range(nmax + 1)])
    else:
        out = _miller(nmax, ax)
    if x < 0:
        out[1::2] *= -1.0
    return out


def bessel_j(n, x):
    """J_n(x) for integer ``n`` (``|n| <= 10**4``) and finite real ``x``."""
    n = int(n)
    if abs(n) > MAX_ORDER:
        raise DomainError(f"order {n} exceeds supported maximum {MAX_ORDER}")
    x = _check_x(x)
    sign = -1.0 if (n < 0 and n % 2) else 1.0
    m = abs(n)
    if 0.25 * x * x <= m + 1:
        return sign * _series(m, x)
    return sign * float(bessel_j_orders(m, x)[m])


def bessel_j_asymptotic(n, x):
    """Large-argument form sqrt(2/(pi x)) cos(x - n pi/2 - pi/4)."""
    x = _check_x(x)
    if x <= 0.0:
        raise DomainError("asymptotic form requires x > 0")
    return math.sqrt(2.0 / (math.pi * x)) * math.cos(x - 0.5 * n * math.pi - 0.25 * math.pi)


def cdt_driving_ratio(m):
    """Approximate m-th zero of J_0, ``m pi - pi/4``, used as the CDT ratio A/omega."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    return m * math.pi - 0.25 * math.pi


def truncation_order(x, tol=SUM_TOL, run=5):
    """Highest order worth keeping in a sum over J_n(x), n >= 0.

    Terms are kept until ``|J_n(x)| < tol`` for ``run`` consecutive orders,
    with a hard cap at ``ceil(2|x|) + 60``.
    """
    ax = abs(_check_x(x))
    cap = int(math.ceil(2.0 * ax)) + 60
    values = np.abs(bessel_j_orders(cap, ax))
    small = 0
    for n, v in enumerate(values):
        if n > ax and v < tol:
            small += 1
            if small == run:
                return n - run
        else:
            small = 0
    return cap
