"""Panelized Filon quadrature for oscillatory integrals over the squeezing
band.

Handles integrals of two shapes (without the 1/pi normalization, which the
caller applies):

    time kernel     int_a^b exp(i f(w)) exp(i w t) dw
    Cauchy kernel   int_a^b exp(i f(w)) / (s - i w) dw

The phase profiles used here are piecewise polynomials of degree <= 2, so on
a panel centered at c the residual after linearizing the phase is exactly
rho(u) = f''(c) u^2 / 2.  Each panel then reduces to moments

    mu_m(theta) = int_{-1}^{1} x^m exp(i theta x) dx,   m = 0..10,

computed by upward recursion for large |theta| and a Taylor series otherwise.
The slowly varying panel factor (residual phase times the optional Cauchy
amplitude) is interpolated at 11 Gauss-Legendre nodes.

Near the pole projection nu = Im s the panels grade geometrically down to a
small core around nu, which is integrated by a closed form: the phase
exponential is Taylor-expanded to second order (with one-sided derivatives
when nu sits on a phase kink), the polynomial-over-Cauchy terms have exact
antiderivatives continuous across the axis, and the cubic remainder is
regular enough for plain Gauss quadrature.  Re s = 0 is treated as the
boundary value from Re s > 0.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._backend import USE_NUMBA, njit


class QuadratureError(ArithmeticError):
    """Quadrature failed to meet its accuracy contract."""


# Residual phase bound per panel; panel half-width = sqrt(2*THETA_Q/|f''|)
THETA_Q = 0.1
_NN = 11  # interpolation nodes / moment order per panel

_GL_X, _GL_W = np.polynomial.legendre.leggauss(_NN)
_V = np.vander(_GL_X, _NN, increasing=True)  # V[g, m] = x_g^m
_VINV = np.linalg.inv(_V)
_VINV_T = np.ascontiguousarray(_VINV.T)

_SMALL_THETA = 12.0
_SERIES_TERMS = 64


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@njit(cache=True)
def _moments11(theta, out):
    if abs(theta) < _SMALL_THETA:
        for m in range(_NN):
            out[m] = 0.0j
        term = 1.0 + 0.0j  # (i theta)^k / k!
        for k in range(_SERIES_TERMS):
            for m in range(k % 2, _NN, 2):  # m + k even
                out[m] += term * (2.0 / (m + k + 1))
            term *= 1j * theta / (k + 1)
            if abs(term) < 1e-18:
                break
    else:
        eip = cmath.exp(1j * theta)
        eim = 1.0 / eip
        it = 1j * theta
        mu = (eip - eim) / it
        out[0] = mu
        sgn = -1.0
        for m in range(1, _NN):
            mu = (eip - sgn * eim) / it - (m / it) * mu
            out[m] = mu
            sgn = -sgn


def _moments11_np(theta: np.ndarray) -> np.ndarray:
    """Vectorized moments, shape (len(theta), 11)."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.zeros((theta.size, _NN), dtype=np.complex128)
    small = np.abs(theta) < _SMALL_THETA
    if np.any(small):
        th = theta[small]
        term = np.ones(th.size, dtype=np.complex128)
        acc = np.zeros((th.size, _NN), dtype=np.complex128)
        for k in range(_SERIES_TERMS):
            for m in range((k % 2), _NN, 2):  # m + k even
                acc[:, m] += term * (2.0 / (m + k + 1))
            term = term * (1j * th) / (k + 1)
            if np.max(np.abs(term)) < 1e-18:
                break
        out[small] = acc
    if np.any(~small):
        th = theta[~small]
        eip = np.exp(1j * th)
        eim = 1.0 / eip
        it = 1j * th
        mus = np.empty((th.size, _NN), dtype=np.complex128)
        mus[:, 0] = (eip - eim) / it
        sgn = -1.0
        for m in range(1, _NN):
            mus[:, m] = (eip - sgn * eim) / it - (m / it) * mus[:, m - 1]
            sgn = -sgn
        out[~small] = mus
    return out


# ---------------------------------------------------------------------------
# panel geometry
# ---------------------------------------------------------------------------

def uniform_edges(p: float, q: float, wmax: float) -> np.ndarray:
    n = max(1, int(math.ceil((q - p) / wmax)))
    if n > 2_000_000:
        raise QuadratureError(f"panel count {n} exceeds limit; band too oscillatory")
    return np.linspace(p, q, n + 1)


def graded_edges(p: float, q: float, nu: float, dmin: float, wmax: float) -> np.ndarray:
    """Panel edges on [p, q], widths <= 0.6*max(dist to nu, dmin), capped at wmax.

    nu must not lie strictly inside (p, q); the caller carves out the pole
    core first.  dmin > 0 bounds the grading from below (pole offset scale).
    """
    if q <= p:
        return np.array([p])
    wmax = min(wmax, q - p)
    near = min(abs(p - nu), abs(q - nu))
    if 0.6 * max(near, dmin) >= wmax:
        return uniform_edges(p, q, wmax)

    from_left = abs(p - nu) <= abs(q - nu)
    d0 = max(near, dmin)
    dists = [d0]
    while 0.6 * dists[-1] < wmax and dists[-1] < (q - p) + d0:
        dists.append(dists[-1] * 1.6)
        if len(dists) > 500:
            raise QuadratureError("panel grading failed to terminate")
    rel = np.asarray(dists) - d0  # edge offsets from the near endpoint, rel[0] = 0
    if from_left:
        pts = p + rel
        pts = pts[pts < q]
        fill = uniform_edges(pts[-1], q, wmax)
        return np.concatenate([pts[:-1], fill])
    pts = q - rel
    pts = pts[pts > p]
    fill = uniform_edges(p, pts[-1], wmax)
    return np.concatenate([fill, pts[-2::-1]])


# ---------------------------------------------------------------------------
# regular panel evaluation
# ---------------------------------------------------------------------------

@njit(cache=True)
def _eval_time_batch_nb(cents, half, fc, fpc, coefs, ts, out_v, out_e):
    mu = np.empty(_NN, dtype=np.complex128)
    for i in range(ts.shape[0]):
        t = ts[i]
        acc = 0.0j
        err = 0.0
        for p in range(cents.shape[0]):
            _moments11((fpc[p] + t) * half[p], mu)
            sdot = 0.0j
            for m in range(_NN):
                sdot += coefs[p, m] * mu[m]
            v = cmath.exp(1j * (fc[p] + t * cents[p])) * half[p] * sdot
            acc += v
            err += half[p] * (abs(coefs[p, 9] * mu[9]) + abs(coefs[p, 10] * mu[10]))
            err += 1e-15 * abs(v)
        out_v[i] = acc
        out_e[i] = err


@njit(cache=True)
def _eval_cauchy_nb(cents, half, fc, fpc, curv, s):
    mu = np.empty(_NN, dtype=np.complex128)
    h = np.empty(_NN, dtype=np.complex128)
    cf = np.empty(_NN, dtype=np.complex128)
    acc = 0.0j
    err = 0.0
    for p in range(cents.shape[0]):
        d2 = half[p]
        for g in range(_NN):
            u = d2 * _GL_X[g]
            w = cents[p] + u
            h[g] = cmath.exp(1j * (0.5 * curv[p] * u * u)) / (s - 1j * w)
        for m in range(_NN):
            z = 0.0j
            for g in range(_NN):
                z += _VINV[m, g] * h[g]
            cf[m] = z
        _moments11(fpc[p] * d2, mu)
        sdot = 0.0j
        for m in range(_NN):
            sdot += cf[m] * mu[m]
        v = cmath.exp(1j * fc[p]) * d2 * sdot
        acc += v
        err += d2 * (abs(cf[9] * mu[9]) + abs(cf[10] * mu[10]))
        err += 1e-15 * abs(v)
    return acc, err


def _eval_time_batch_np(cents, half, fc, fpc, coefs, ts):
    vals = np.empty(ts.size, dtype=np.complex128)
    errs = np.empty(ts.size, dtype=np.float64)
    # chunk over t to bound the (nt x npanels) temporaries
    chunk = max(1, int(4e6 / max(cents.size, 1)))
    for i0 in range(0, ts.size, chunk):
        t = ts[i0 : i0 + chunk, None]
        mus = _moments11_np(((fpc[None, :] + t) * half[None, :]).ravel()).reshape(
            t.size, cents.size, _NN
        )
        sdot = np.einsum("pm,tpm->tp", coefs, mus)
        pv = np.exp(1j * (fc[None, :] + t * cents[None, :])) * half[None, :] * sdot
        vals[i0 : i0 + chunk] = pv.sum(axis=1)
        tail = half[None, :] * (
            np.abs(coefs[None, :, 9] * mus[:, :, 9]) + np.abs(coefs[None, :, 10] * mus[:, :, 10])
        )
        errs[i0 : i0 + chunk] = tail.sum(axis=1) + 1e-15 * np.abs(pv).sum(axis=1)
    return vals, errs


def _eval_cauchy_np(cents, half, fc, fpc, curv, s):
    u = half[:, None] * _GL_X[None, :]
    w = cents[:, None] + u
    h = np.exp(1j * (0.5 * curv[:, None] * u * u)) / (s - 1j * w)
    cf = h @ _VINV_T
    mus = _moments11_np(fpc * half)
    sdot = np.einsum("pm,pm->p", cf, mus)
    pv = np.exp(1j * fc) * half * sdot
    tail = half * (np.abs(cf[:, 9] * mus[:, 9]) + np.abs(cf[:, 10] * mus[:, 10]))
    return complex(pv.sum()), float(tail.sum() + 1e-15 * np.abs(pv).sum())


# ---------------------------------------------------------------------------
# central core (Cauchy pole region) closed forms
# ---------------------------------------------------------------------------

def _cauchy_m0(sigma: float, u1: float, u2: float) -> complex:
    """int_{u1}^{u2} du / (sigma - i u), as an ordinary contour integral.

    Valid for either sign of sigma (the pole sits at u = -i sigma, off the
    real path); sigma = 0 takes the boundary value from Re s -> 0+.
    """
    if sigma == 0.0:
        if u1 == 0.0 or u2 == 0.0:
            raise ZeroDivisionError("one-sided M0 at sigma = 0 diverges")
        strad = math.pi if (u1 < 0.0 < u2) else 0.0
        return strad + 1j * math.log(abs(u2 / u1))
    re = math.atan(u2 / sigma) - math.atan(u1 / sigma)
    im = 0.5 * math.log((sigma * sigma + u2 * u2) / (sigma * sigma + u1 * u1))
    return re + 1j * im


def _cauchy_m1(sigma: float, u1: float, u2: float) -> complex:
    if sigma == 0.0:
        return 1j * (u2 - u1)
    return 1j * (u2 - u1) - 1j * sigma * _cauchy_m0(sigma, u1, u2)


def _cauchy_m2(sigma: float, u1: float, u2: float) -> complex:
    if sigma == 0.0:
        return 0.5j * (u2 * u2 - u1 * u1)
    return 0.5j * (u2 * u2 - u1 * u1) + sigma * (u2 - u1) - sigma * sigma * _cauchy_m0(
        sigma, u1, u2
    )


def _core_side_smooth(sigma, u1, u2, fp, fpp):
    """Taylor-subtracted side integral minus the shared M0 contribution.

    Returns a1*M1 + a2*M2 + int R(u)/(sigma - i u) du over [u1, u2] where
    R(u) = exp(i phi) - 1 - a1 u - a2 u^2, phi = fp*u + fpp*u^2/2.
    """
    a1 = 1j * fp
    a2 = 0.5 * (1j * fpp - fp * fp)

    def gl(v1, v2):
        uu = 0.5 * (v1 + v2) + 0.5 * (v2 - v1) * _GL_X
        phi = fp * uu + 0.5 * fpp * uu * uu
        r = np.exp(1j * phi) - 1.0 - a1 * uu - a2 * uu * uu
        return 0.5 * (v2 - v1) * np.sum(_GL_W * r / (sigma - 1j * uu))

    um = 0.5 * (u1 + u2)
    i1 = gl(u1, u2)
    i2 = gl(u1, um) + gl(um, u2)
    val = a1 * _cauchy_m1(sigma, u1, u2) + a2 * _cauchy_m2(sigma, u1, u2) + i2
    return val, abs(i1 - i2)


@dataclass
class CauchyCore:
    """Closed-form treatment of the pole neighborhood [nu+u_lo, nu+u_hi]."""

    nu: float
    u_lo: float  # <= 0
    u_hi: float  # >= 0
    f_nu: float
    fp_left: float
    fpp_left: float
    fp_right: float
    fpp_right: float

    def evaluate(self, s: complex):
        sigma = s.real
        err = 0.0
        if not self.u_lo < self.u_hi:
            return 0.0j, 0.0
        val = _cauchy_m0(sigma, self.u_lo, self.u_hi)
        if self.u_lo < 0.0:
            v, e = _core_side_smooth(sigma, self.u_lo, 0.0, self.fp_left, self.fpp_left)
            val += v
            err += e
        if self.u_hi > 0.0:
            v, e = _core_side_smooth(sigma, 0.0, self.u_hi, self.fp_right, self.fpp_right)
            val += v
            err += e
        pref = cmath.exp(1j * self.f_nu)
        return pref * val, err


# ---------------------------------------------------------------------------
# assembled evaluators
# ---------------------------------------------------------------------------

@dataclass
class PanelSet:
    """Regular (non-core) panels: geometry plus local phase data."""

    centers: np.ndarray
    half: np.ndarray
    f_c: np.ndarray
    fp_c: np.ndarray
    curv: np.ndarray

    @classmethod
    def from_edges(cls, edges: np.ndarray, f_c, fp_c, curv) -> "PanelSet":
        centers = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        return cls(centers, half, f_c, fp_c, curv)


def time_coefficients(panels: PanelSet) -> np.ndarray:
    """Interpolation coefficients of exp(i rho) per panel (t-independent)."""
    u = panels.half[:, None] * _GL_X[None, :]
    h = np.exp(1j * (0.5 * panels.curv[:, None] * u * u))
    return h @ _VINV_T


def eval_time(panels: PanelSet, coefs: np.ndarray, t: np.ndarray):
    t = np.ascontiguousarray(t, dtype=np.float64)
    if USE_NUMBA:
        out_v = np.empty(t.size, dtype=np.complex128)
        out_e = np.empty(t.size, dtype=np.float64)
        _eval_time_batch_nb(
            np.ascontiguousarray(panels.centers),
            np.ascontiguousarray(panels.half),
            np.ascontiguousarray(panels.f_c),
            np.ascontiguousarray(panels.fp_c),
            np.ascontiguousarray(coefs),
            t,
            out_v,
            out_e,
        )
        return out_v, out_e
    return _eval_time_batch_np(panels.centers, panels.half, panels.f_c, panels.fp_c, coefs, t)


def eval_cauchy(panels: PanelSet, core, s: complex):
    if panels.centers.size:
        if USE_NUMBA:
            v, e = _eval_cauchy_nb(
                np.ascontiguousarray(panels.centers),
                np.ascontiguousarray(panels.half),
                np.ascontiguousarray(panels.f_c),
                np.ascontiguousarray(panels.fp_c),
                np.ascontiguousarray(panels.curv),
                complex(s),
            )
        else:
            v, e = _eval_cauchy_np(
                panels.centers, panels.half, panels.f_c, panels.fp_c, panels.curv, complex(s)
            )
    else:
        v, e = 0.0j, 0.0
    if core is not None:
        vc, ec = core.evaluate(complex(s))
        v += vc
        e += ec
    return v, e
