"""Slow, independently coded reference implementations used by the tests.

Everything here trades speed for transparency: direct series and continued
fractions accumulated in mpmath extended precision, plain Riemann sums, and
an FFT-based double transform for the Laplace-domain kernel.  None of it
shares code paths with the package.
"""

import mpmath as mp
import numpy as np


def erfc_series_mp(z, dps=60, max_terms=4000):
    """erfc by the Maclaurin series of erf, in extended precision.

    erf(z) = (2/sqrt(pi)) sum_n (-1)^n z^(2n+1) / (n! (2n+1))
    """
    zz = mp.mpc(z)
    with mp.workdps(dps + int(4.0 * abs(zz) ** 2)):
        total = mp.mpc(0)
        term = mp.mpc(zz)  # n = 0 term before the 1/(2n+1) factor
        n = 0
        while n < max_terms:
            contrib = term / (2 * n + 1)
            total += contrib
            if abs(contrib) < mp.mpf(10) ** (-dps - 10) * max(abs(total), mp.mpf(1)):
                if n >= 50:  # keep at least 50 terms on principle
                    break
            n += 1
            term = -term * zz * zz / n
        erf = 2 / mp.sqrt(mp.pi) * total
        return complex(1 - erf)


def faddeeva_series_mp(z, dps=60, max_terms=4000):
    """w(z) by its Maclaurin series sum_n (iz)^n / Gamma(n/2 + 1)."""
    zz = mp.mpc(z)
    with mp.workdps(dps + int(4.0 * abs(zz) ** 2)):
        iz = mp.mpc(0, 1) * zz
        total = mp.mpc(0)
        power = mp.mpc(1)
        for n in range(max_terms):
            contrib = power / mp.gamma(mp.mpf(n) / 2 + 1)
            total += contrib
            if n > 2 * abs(zz) ** 2 + 60 and abs(contrib) < mp.mpf(10) ** (-dps - 10) * abs(total):
                break
            power *= iz
        return complex(total)


def faddeeva_cf_mp(z, depth=120, dps=50):
    """w(z) by the Laplace continued fraction, in extended precision.

    w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))

    Reliable for Im z >= 0 away from the real axis, and for large |z|
    anywhere in the closed upper half-plane; the tests only call it there.
    """
    zz = mp.mpc(z)
    with mp.workdps(dps):
        tail = mp.mpc(0)
        for n in range(depth, 0, -1):
            tail = (mp.mpf(n) / 2) / (zz - tail)
        return complex(mp.mpc(0, 1) / mp.sqrt(mp.pi) / (zz - tail))


def erfc_mp_builtin(z, dps=50):
    """mpmath's own erfc: an additional independent cross-check."""
    with mp.workdps(dps):
        return complex(mp.erfc(mp.mpc(z)))


def phase_profile(mod, omega):
    """f(omega) for the three closed-form modulation profiles."""
    kind, T = mod
    omega = np.asarray(omega, dtype=float)
    if kind == "none":
        return np.zeros_like(omega)
    if kind == "linear":
        return T * np.abs(omega)
    if kind == "quadratic":
        return T * T * omega * omega
    raise ValueError(kind)


def kernel_time_riemann(mod, B, t, n=1_000_000):
    """k(t) by a plain midpoint Riemann sum over the squeezing band."""
    w = (np.arange(n) + 0.5) / n * B - B / 2
    f = phase_profile(mod, w)
    return complex(np.sum(np.exp(1j * (f + w * t))) * (B / n) / np.pi)


def kernel_laplace_fft(mod, B, s_values, n_omega=2**21, pad=8):
    """Laplace-transformed kernel by the double transform.

    Builds k(t) on a uniform time grid with one FFT of exp(i f(omega)) over
    the band, then integrates exp(-s t) k(t) dt by the trapezoidal rule.
    Only valid for Re s large enough that exp(-Re s * t_max) is negligible
    (t_max = 2 pi n_omega / B / pad ... the caller must check).
    """
    dw = B / n_omega
    w = (np.arange(n_omega) - n_omega / 2) * dw
    g = np.exp(1j * phase_profile(mod, w))
    n_fft = n_omega * pad
    buf = np.zeros(n_fft, dtype=np.complex128)
    buf[: n_omega] = g
    # k(t_m) = (dw/pi) sum_j g_j exp(i w_j t_m), t_m = 2 pi m / (n_fft dw)
    spec = np.fft.ifft(buf) * n_fft  # sum_j buf_j exp(+2i pi j m / n_fft)
    m = np.arange(n_fft)
    t = 2 * np.pi * m / (n_fft * dw)
    phase0 = np.exp(1j * w[0] * t)
    k = (dw / np.pi) * phase0 * spec
    out = []
    for s in np.atleast_1d(s_values):
        decay = np.exp(-s * t)
        integrand = decay * k
        val = np.trapz(integrand, t)
        out.append(complex(val))
    return np.array(out)
