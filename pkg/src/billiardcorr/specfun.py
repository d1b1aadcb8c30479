"""Bessel functions of order 0 and 1 of a real argument, in double precision.

Three regimes are used:

* ``|x| <= 4``: ascending power series,
* ``4 < |x| <= 25``: Miller's backward recurrence normalised by
  ``J0 + 2 sum J_2k = 1``, with Neumann series for ``Y0`` and ``Y1``,
* ``|x| > 25``: Hankel asymptotic expansion (smallest term ~ exp(-2x)).

All functions accept scalars or arrays and return the same shape.  The
series is stopped at 4 rather than 8: between 4 and 8 its alternating terms
cancel enough to leave ~1e-14 of rounding noise, which finite differences
of J0 amplify.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_LIMIT = 4.0
ASYMPTOTIC_LIMIT = 25.0



def _asarray(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Bessel function argument must be finite")
    return arr


def _out(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


# --- power series -----------------------------------------------------------

def _series_j0(x):
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 40):
        term = term * q / (k * k)
        total += term
    return total


def _series_j1(x):
    q = -0.25 * x * x
    term = 0.5 * x
    total = term.copy()
    for k in range(1, 40):
        term = term * q / (k * (k + 1))
        total += term
    return total


def _series_y0(x, j0):
    q = -0.25 * x * x
    term = np.ones_like(x)
    harmonic = 0.0
    total = np.zeros_like(x)
    for k in range(1, 40):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        total -= harmonic * term
    return (2.0 / math.pi) * ((np.log(0.5 * x) + EULER_GAMMA) * j0 + total)


def _series_y1(x, j1):
    # psi(k+1) + psi(k+2) = -2*gamma + H_k + H_{k+1}
    q = -0.25 * x * x
    term = 0.5 * x
    h_k, h_k1 = 0.0, 1.0
    total = (-2.0 * EULER_GAMMA + h_k + h_k1) * term
    for k in range(1, 40):
        term = term * q / (k * (k + 1))
        h_k += 1.0 / k
        h_k1 += 1.0 / (k + 1)
        total += (-2.0 * EULER_GAMMA + h_k + h_k1) * term
    return -2.0 / (math.pi * x) + (2.0 / math.pi) * np.log(0.5 * x) * j1 - total / math.pi


# --- Miller backward recurrence ---------------------------------------------

def _miller(x):
    """Return (J0, J1, Y0, Y1) for moderate positive x via backward recurrence."""
    xmax = float(np.max(x))
    nstart = int(xmax + 10.0 * xmax ** (1.0 / 3.0) + 20.0)
    nstart += nstart % 2
    inv = 1.0 / x
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    s_y0 = np.zeros_like(x)
    s_y1 = np.zeros_like(x)
    for n in range(nstart, 0, -1):
        j_next, j_cur = j_cur, 2.0 * n * inv * j_cur - j_next
        m = n - 1
        if m % 2 == 0:
            if m > 0:
                k = m // 2
                norm += 2.0 * j_cur
                s_y0 += (-1.0) ** k / k * j_cur
        else:
            # Y1 sum: sum_k (-1)^k (J_{2k-1} - J_{2k+1}) / k
            k_lo = (m + 1) // 2
            coef = (-1.0) ** k_lo / k_lo
            if m >= 3:
                k_hi = (m - 1) // 2
                coef -= (-1.0) ** k_hi / k_hi
            s_y1 += coef * j_cur
        big = np.abs(j_cur) > 1e200
        if np.any(big):
            scale = np.where(big, 1e-200, 1.0)
            j_next = j_next * scale
            j_cur = j_cur * scale
            norm *= scale
            s_y0 *= scale
            s_y1 *= scale
    norm += j_cur
    j0 = j_cur / norm
    j1 = j_next / norm
    s_y0 /= norm
    s_y1 /= norm
    lg = np.log(0.5 * x) + EULER_GAMMA
    y0 = (2.0 / math.pi) * (lg * j0 - 2.0 * s_y0)
    y1 = (2.0 / math.pi) * (-j0 * inv + lg * j1 + s_y1)
    return j0, j1, y0, y1


# --- Hankel asymptotics -----------------------------------------------------

def _hankel_coefficients(order, nterms):
    """Coefficients of P and Q as polynomials in 1/x^2 (Q carries a 1/x)."""
    mu = 4.0 * order * order
    a = [1.0]
    for k in range(1, 2 * nterms):
        a.append(a[-1] * (mu - (2 * k - 1) ** 2) / (8.0 * k))
    p = np.array([(-1) ** j * a[2 * j] for j in range(nterms)])
    q = np.array([(-1) ** j * a[2 * j + 1] for j in range(nterms)])
    return p, q


# 12 terms in 1/x^2 reach the rounding level for x >= 25, 6 for x >= 60
_HANKEL = {(nu, n): _hankel_coefficients(nu, n) for nu in (0, 1) for n in (6, 12)}
_FAR = 60.0


def _horner(coefs, z):
    out = np.full_like(z, coefs[-1])
    for c in coefs[-2::-1]:
        out = out * z + c
    return out


def _asymptotic(x, orders=(0, 1)):
    """Hankel expansion; returns ``{order: (J, Y)}`` sharing one sin/cos."""
    c, s = np.cos(x), np.sin(x)
    amp = np.sqrt(2.0 / (math.pi * x))
    inv = 1.0 / x
    z = inv * inv
    nterms = 6 if float(np.min(x)) >= _FAR else 12
    out = {}
    for order in orders:
        pc, qc = _HANKEL[(order, nterms)]
        p = _horner(pc, z)
        q = _horner(qc, z) * inv
        if order == 0:
            cw = (c + s) * _RSQRT2
            sw = (s - c) * _RSQRT2
        else:
            cw = (s - c) * _RSQRT2
            sw = -(s + c) * _RSQRT2
        out[order] = (amp * (p * cw - q * sw), amp * (p * sw + q * cw))
    return out


_RSQRT2 = 1.0 / math.sqrt(2.0)


# --- dispatch -----------------------------------------------------------------

def _evaluate(ax, want_y, want_j1=True):
    """Return J0, J1 (and Y0, Y1 if requested) for an array of x >= 0.

    With ``want_j1=False`` the order-one values are not needed; the series
    and asymptotic branches then skip them (J1, Y1 are left unset there)."""
    j0 = np.empty_like(ax)
    j1 = np.empty_like(ax)
    y0 = np.empty_like(ax) if want_y else None
    y1 = np.empty_like(ax) if want_y else None

    low = ax <= SERIES_LIMIT
    mid = (ax > SERIES_LIMIT) & (ax <= ASYMPTOTIC_LIMIT)
    high = ax > ASYMPTOTIC_LIMIT

    if np.any(low):
        xl = ax[low]
        j0[low] = _series_j0(xl)
        if want_j1:
            j1[low] = _series_j1(xl)
        if want_y:
            with np.errstate(divide="ignore", invalid="ignore"):
                y0[low] = _series_y0(xl, j0[low])
                if want_j1:
                    y1[low] = _series_y1(xl, j1[low])
    if np.any(mid):
        a, b, c, d = _miller(ax[mid])
        j0[mid], j1[mid] = a, b
        if want_y:
            y0[mid], y1[mid] = c, d
    if np.any(high):
        far = ax > _FAR
        near = high & ~far
        for sel in (near, far):
            if not np.any(sel):
                continue
            if not want_j1:
                res = _asymptotic(ax[sel], (0,))
                j0[sel] = res[0][0]
                if want_y:
                    y0[sel] = res[0][1]
                continue
            res = _asymptotic(ax[sel])
            j0[sel], j1[sel] = res[0][0], res[1][0]
            if want_y:
                y0[sel], y1[sel] = res[0][1], res[1][1]
    return j0, j1, y0, y1


def bessel_j0(x):
    """Bessel function of the first kind of order zero."""
    arr = _asarray(x)
    ax = np.abs(np.atleast_1d(arr))
    j0 = _evaluate(ax, False, False)[0]
    return _out(j0.reshape(arr.shape), x)


def bessel_j1(x):
    """Bessel function of the first kind of order one (odd in x)."""
    arr = _asarray(x)
    flat = np.atleast_1d(arr)
    j1 = _evaluate(np.abs(flat), False)[1]
    j1 = np.where(flat < 0, -j1, j1)
    return _out(j1.reshape(arr.shape), x)


def _positive(x):
    arr = _asarray(x)
    if np.any(arr <= 0):
        raise ValueError("Bessel Y is singular for x <= 0")
    return arr


def bessel_y0(x):
    """Bessel function of the second kind of order zero, x > 0."""
    arr = _positive(x)
    y0 = _evaluate(np.atleast_1d(arr).ravel(), True, False)[2]
    return _out(y0.reshape(arr.shape), x)


def bessel_y1(x):
    """Bessel function of the second kind of order one, x > 0."""
    arr = _positive(x)
    y1 = _evaluate(np.atleast_1d(arr), True)[3]
    return _out(y1.reshape(arr.shape), x)


def bessel_all(x):
    """Return ``(J0, J1, Y0, Y1)`` at positive ``x`` sharing one evaluation.

    This is the hot path for kernel assembly, so the arguments are not
    reshaped to scalars.
    """
    arr = _positive(x)
    j0, j1, y0, y1 = _evaluate(arr.ravel(), True)
    shape = arr.shape
    return j0.reshape(shape), j1.reshape(shape), y0.reshape(shape), y1.reshape(shape)


def helmholtz_kernel(k, rho):
    """Outgoing free-space Green function ``(i/4) H0(k rho)`` in two dimensions.

    The real part is ``-Y0(k rho)/4`` and the imaginary part ``J0(k rho)/4``.
    The point ``rho = 0`` is a logarithmic singularity and is rejected.
    """
    if np.any(np.asarray(k) <= 0):
        raise ValueError("wavenumber must be positive")
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(~np.isfinite(rho_arr)) or np.any(rho_arr <= 0):
        raise ValueError("rho must be positive; handle the diagonal separately")
    z = np.asarray(k, dtype=float) * rho_arr
    j0, _, y0, _ = _evaluate(np.atleast_1d(z).ravel(), True)
    val = (-0.25 * y0 + 0.25j * j0).reshape(np.shape(z))
    if np.ndim(z) == 0:
        return complex(val)
    return val
