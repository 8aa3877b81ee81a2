"""Squeezing-phase profiles and the memory kernel they induce.

A broadband squeezed reservoir with a frequency-dependent squeezing phase
f(w) (even, f(0) = 0, flat band of full width B) couples the two atomic
polarization quadratures through the memory kernel

    k(t) = (1/pi) int_{-B/2}^{B/2} exp(i f(w)) exp(i w t) dw .

This module evaluates k(t), its Laplace transform

    kt(s) = int_0^inf exp(-s t) k(t) dt
          = (1/pi) int_{-B/2}^{B/2} exp(i f(w)) / (s - i w) dw ,

and the first moment k1 = int_0^inf t k(t) dt that controls the leading
slow-down of the polarization decay.  The quadratic profile f = T^2 w^2
additionally has the wide-band closed form

    kt(s) = exp(-i T^2 s^2) erfc(sqrt(-i) T s),  sqrt(-i) = exp(-i pi/4),

evaluated through the Faddeeva function so it stays finite where the bare
erfc over/underflows.  The numeric band integral is kept deliberately
independent of that closed form; the two cross-validate each other.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import oscquad
from .cerf import OverflowSignal, _faddeeva_upper
from .oscquad import THETA_Q, CauchyCore, PanelSet, QuadratureError

_SQRT_MI = np.exp(-0.25j * np.pi)  # principal sqrt(-i)

_KINDS = ("none", "linear", "quadratic", "tabulated")


class ModulationWarning(UserWarning):
    """Non-fatal modulation diagnostics (weak-bandwidth, shaky moments)."""


@dataclass(frozen=True, eq=False)
class PhaseModulation:
    """Squeezing-phase profile f(w): even in w with f(0) = 0.

    kind is one of 'none', 'linear' (f = T|w|), 'quadratic' (f = T^2 w^2)
    or 'tabulated' (linear interpolation of samples on w >= 0, no
    extrapolation).
    """

    kind: str
    T: float = 0.0
    table_omega: np.ndarray | None = field(default=None, repr=False)
    table_phase: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown modulation kind {self.kind!r}")
        if self.kind in ("linear", "quadratic"):
            if not (np.isfinite(self.T) and self.T >= 0.0):
                raise ValueError("modulation time scale must satisfy T >= 0")
        if self.kind == "tabulated":
            w = np.ascontiguousarray(self.table_omega, dtype=np.float64)
            f = np.ascontiguousarray(self.table_phase, dtype=np.float64)
            if w.ndim != 1 or w.shape != f.shape or w.size < 2:
                raise ValueError("phase table needs matching 1-d omega/phase columns")
            if w[0] != 0.0 or f[0] != 0.0:
                raise ValueError("phase table must start at omega = 0 with f(0) = 0")
            if np.any(np.diff(w) <= 0.0):
                raise ValueError("phase table omega column must be strictly increasing")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(f))):
                raise ValueError("phase table entries must be finite")
            w.flags.writeable = False
            f.flags.writeable = False
            object.__setattr__(self, "table_omega", w)
            object.__setattr__(self, "table_phase", f)

    @staticmethod
    def none() -> "PhaseModulation":
        return PhaseModulation("none")

    @staticmethod
    def linear(T: float) -> "PhaseModulation":
        return PhaseModulation("linear", T=float(T))

    @staticmethod
    def quadratic(T: float) -> "PhaseModulation":
        return PhaseModulation("quadratic", T=float(T))

    @staticmethod
    def tabulated(omega, phase) -> "PhaseModulation":
        return PhaseModulation("tabulated", table_omega=np.asarray(omega), table_phase=np.asarray(phase))

    @property
    def is_trivial(self) -> bool:
        """True when f is identically zero (white squeezing phase)."""
        if self.kind == "none":
            return True
        if self.kind in ("linear", "quadratic") and self.T == 0.0:
            return True
        if self.kind == "tabulated":
            return bool(np.all(self.table_phase == 0.0))
        return False

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "T": self.T}
        if self.kind == "tabulated":
            d["table_omega"] = self.table_omega.tolist()
            d["table_phase"] = self.table_phase.tolist()
        return d

    @staticmethod
    def from_dict(d: dict) -> "PhaseModulation":
        if d["kind"] == "tabulated":
            return PhaseModulation.tabulated(d["table_omega"], d["table_phase"])
        return PhaseModulation(d["kind"], T=float(d.get("T", 0.0)))


def load_modulation_table(path) -> PhaseModulation:
    """Read a tabulated phase profile from two-column CSV `omega,f`.

    omega >= 0 in units of the vacuum decay rate, header row required.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip().lower() for c in rows[0][:2]] != ["omega", "f"]:
        raise ValueError(f"{path}: expected header row 'omega,f'")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
    return PhaseModulation.tabulated(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class Bandwidth:
    """Full width of the flat squeezing band, centered on the carrier."""

    value: float

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value > 0.0):
            raise ValueError("bandwidth must be positive and finite")


def as_bandwidth(B) -> float:
    if isinstance(B, Bandwidth):
        return B.value
    b = float(B)
    if not (np.isfinite(b) and b > 0.0):
        raise ValueError("bandwidth must be positive and finite")
    return b


def check_bandwidth(B, mod: PhaseModulation, rates=()) -> None:
    """Warn when B fails to dominate every other frequency scale by 100x."""
    b = as_bandwidth(B)
    scales = [abs(r) for r in rates]
    if mod.kind in ("linear", "quadratic") and mod.T > 0.0:
        scales.append(1.0 / mod.T)
    if scales and b < 100.0 * max(scales):
        warnings.warn(
            f"bandwidth {b:g} is below 100x the largest system scale {max(scales):g}; "
            "the flat-band model is marginal here",
            ModulationWarning,
            stacklevel=3,
        )


@dataclass(frozen=True)
class KernelValue:
    """Kernel evaluation plus how it was obtained and an error estimate."""

    value: complex
    method: str  # 'analytic' | 'quadrature'
    err_estimate: float

    def __post_init__(self):
        if self.method == "analytic" and self.err_estimate != 0.0:
            raise ValueError("analytic kernel evaluations report err_estimate = 0")
        if self.err_estimate < 0.0:
            raise ValueError("err_estimate must be nonnegative")


# ---------------------------------------------------------------------------
# phase profile evaluation
# ---------------------------------------------------------------------------

def phase_eval(mod: PhaseModulation, omega):
    """f(omega); even in omega, f(0) = 0.  Vectorized over omega."""
    w = np.asarray(omega, dtype=np.float64)
    scalar = w.ndim == 0
    aw = np.abs(w)
    if mod.kind == "none":
        out = np.zeros_like(aw)
    elif mod.kind == "linear":
        out = mod.T * aw
    elif mod.kind == "quadratic":
        out = mod.T * mod.T * aw * aw
    else:
        if np.any(aw > mod.table_omega[-1]):
            raise ValueError("phase table query outside tabulated grid")
        out = np.interp(aw, mod.table_omega, mod.table_phase)
    return float(out) if scalar else out


def _tab_slope(mod: PhaseModulation, x: np.ndarray) -> np.ndarray:
    """d f / d|w| of the tabulated profile at |w| = x (segment slopes)."""
    tw, tf = mod.table_omega, mod.table_phase
    idx = np.clip(np.searchsorted(tw, x, side="right") - 1, 0, tw.size - 2)
    return (tf[idx + 1] - tf[idx]) / (tw[idx + 1] - tw[idx])


def _phase_arrays(mod: PhaseModulation, w: np.ndarray):
    """(f, f', f'') at interior points w (never exactly on a kink)."""
    aw = np.abs(w)
    sg = np.sign(w)
    if mod.kind == "none":
        z = np.zeros_like(w)
        return z, z, z
    if mod.kind == "linear":
        return mod.T * aw, mod.T * sg, np.zeros_like(w)
    if mod.kind == "quadratic":
        T2 = mod.T * mod.T
        return T2 * w * w, 2.0 * T2 * w, np.full_like(w, 2.0 * T2)
    f = np.interp(aw, mod.table_omega, mod.table_phase)
    return f, sg * _tab_slope(mod, aw), np.zeros_like(w)


def _phase_sides(mod: PhaseModulation, nu: float):
    """One-sided (f', f'') just left and right of nu."""
    if mod.kind == "none":
        return 0.0, 0.0, 0.0, 0.0
    if mod.kind == "quadratic":
        T2 = mod.T * mod.T
        return 2.0 * T2 * nu, 2.0 * T2, 2.0 * T2 * nu, 2.0 * T2
    if mod.kind == "linear":
        if nu > 0.0:
            return mod.T, 0.0, mod.T, 0.0
        if nu < 0.0:
            return -mod.T, 0.0, -mod.T, 0.0
        return -mod.T, 0.0, mod.T, 0.0
    # tabulated: slopes of the segments meeting |nu|, sign-chained through w<0
    tw = mod.table_omega
    x = abs(nu)
    eps = 1e-12 * max(tw[-1], 1.0)
    sl_lo = float(_tab_slope(mod, np.array([max(x - eps, 0.0)]))[0])
    sl_hi = float(_tab_slope(mod, np.array([min(x + eps, tw[-1])]))[0])
    if nu > 0.0:
        return sl_lo, 0.0, sl_hi, 0.0
    if nu < 0.0:
        return -sl_hi, 0.0, -sl_lo, 0.0
    return -sl_hi, 0.0, sl_hi, 0.0


def _kink_points(mod: PhaseModulation, b2: float) -> np.ndarray:
    """Interior breakpoints of f' inside (-b2, b2)."""
    if mod.kind in ("none", "quadratic"):
        return np.array([])
    if mod.kind == "linear":
        return np.array([0.0])
    tw = mod.table_omega
    interior = tw[(tw > 0.0) & (tw < b2)]
    return np.unique(np.concatenate([-interior[::-1], [0.0], interior]))


def _curv_halfwidth(mod: PhaseModulation) -> float:
    """Panel half-width from phase curvature (inf for piecewise-linear f)."""
    if mod.kind == "quadratic" and mod.T > 0.0:
        return math.sqrt(2.0 * THETA_Q) / (math.sqrt(2.0) * mod.T)  # sqrt(theta_q)/T
    return math.inf


def _segments(mod: PhaseModulation, b2: float, gap=None):
    """Band segments split at kinks, optionally minus the pole-core gap."""
    pts = [-b2, b2]
    pts.extend(self_k for self_k in _kink_points(mod, b2))
    pts = sorted(set(pts))
    segs = list(zip(pts[:-1], pts[1:]))
    if gap is None:
        return segs
    glo, ghi = gap
    out = []
    for p, q in segs:
        p2, q2 = max(p, ghi), q
        p1, q1 = p, min(q, glo)
        if q1 > p1:
            out.append((p1, q1))
        if q2 > p2:
            out.append((p2, q2))
    return out


def _tab_band_check(mod: PhaseModulation, b2: float):
    if mod.kind == "tabulated" and mod.table_omega[-1] < b2:
        raise ValueError("phase table does not cover the half-band B/2")


# ---------------------------------------------------------------------------
# time-domain kernel
# ---------------------------------------------------------------------------

def _build_time_panels(mod: PhaseModulation, B: float):
    b2 = 0.5 * B
    _tab_band_check(mod, b2)
    hw = min(_curv_halfwidth(mod), b2 / 8.0)
    edges = [oscquad.uniform_edges(p, q, 2.0 * hw) for p, q in _segments(mod, b2)]
    pairs = np.concatenate([np.stack([e[:-1], e[1:]], axis=1) for e in edges], axis=0)
    keep = pairs[:, 1] > pairs[:, 0]
    pairs = pairs[keep]
    centers = 0.5 * (pairs[:, 0] + pairs[:, 1])
    half = 0.5 * (pairs[:, 1] - pairs[:, 0])
    f, fp, curv = _phase_arrays(mod, centers)
    panels = PanelSet(centers, half, f, fp, curv)
    return panels, oscquad.time_coefficients(panels)


def kernel_time_grid(mod: PhaseModulation, B, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """k(t) on an array of times t >= 0.  Returns (values, error estimates)."""
    b = as_bandwidth(B)
    t = np.ascontiguousarray(t_grid, dtype=np.float64)
    if np.any(t < 0.0):
        raise ValueError("kernel times must satisfy t >= 0")
    if mod.is_trivial:
        vals = np.empty(t.size, dtype=np.complex128)
        nz = t != 0.0
        vals[~nz] = b / np.pi
        vals[nz] = (2.0 / np.pi) * np.sin(0.5 * b * t[nz]) / t[nz]
        return vals, np.zeros(t.size)
    panels, coefs = _build_time_panels(mod, b)
    vals, errs = oscquad.eval_time(panels, coefs, t)
    vals /= np.pi
    errs /= np.pi
    tol = 1e-8 * b
    if np.any(errs > tol):
        raise QuadratureError(
            f"time-kernel quadrature error estimate {errs.max():.3e} exceeds {tol:.3e}"
        )
    return vals, errs


def kernel_time(mod: PhaseModulation, B, t: float) -> KernelValue:
    """Memory kernel k(t) for a single time t >= 0."""
    if mod.is_trivial:
        vals, _ = kernel_time_grid(mod, B, np.array([t]))
        return KernelValue(complex(vals[0]), "analytic", 0.0)
    vals, errs = kernel_time_grid(mod, B, np.array([t]))
    return KernelValue(complex(vals[0]), "quadrature", float(errs[0]))


# ---------------------------------------------------------------------------
# Laplace-domain kernel
# ---------------------------------------------------------------------------

def kernel_laplace_quadratic(T: float, s) -> KernelValue:
    """Wide-band closed form for the quadratic profile.

    kt(s) = exp(-i T^2 s^2) erfc(e^{-i pi/4} T s), evaluated as the Faddeeva
    function w(e^{+i pi/4} T s) whenever that argument lies in the upper
    half-plane, else through one reflection.  Exact Markov limit kt = 1 at
    T = 0.  Entire in s, so it is also the analytic continuation used by the
    pole search.
    """
    if T < 0.0:
        raise ValueError("T >= 0 required")
    s_arr = np.asarray(s, dtype=np.complex128)
    scalar = s_arr.ndim == 0
    if T == 0.0:
        out = np.ones_like(s_arr)
        return KernelValue(complex(out), "analytic", 0.0) if scalar else out
    v = np.exp(0.25j * np.pi) * T * s_arr
    upper = v.imag >= 0.0
    out = np.empty_like(s_arr)
    if np.any(upper):
        out[upper] = _faddeeva_upper(v[upper])
    if np.any(~upper):
        e = -1j * T * T * s_arr[~upper] ** 2
        if np.any(e.real > 705.0):
            raise OverflowSignal(
                "exp(-i T^2 s^2) overflows here; use the pole-search log path"
            )
        out[~upper] = 2.0 * np.exp(e) - np.asarray(_faddeeva_upper(-v[~upper]))
    if scalar:
        return KernelValue(complex(out), "analytic", 0.0)
    return out


def kernel_laplace_quadratic_deriv(T: float, s: complex) -> complex:
    """d/ds of the quadratic closed form: -2i T^2 s kt(s) - 2T e^{-i pi/4}/sqrt(pi)."""
    kt = kernel_laplace_quadratic(T, np.asarray(s, dtype=complex))
    kt = kt.value if isinstance(kt, KernelValue) else complex(kt)
    return -2j * T * T * s * kt - 2.0 * T * _SQRT_MI / math.sqrt(math.pi)


def _band_cauchy(mod: PhaseModulation, B: float, s: complex):
    """Raw band integral int exp(i f(w))/(s - i w) dw (no 1/pi).

    Valid for any s whose distance from the band segment of the imaginary
    axis is nonzero, or for Re s = 0 strictly inside the band (boundary
    value from Re s > 0).  Used with Re s < 0 only by the pole search.
    """
    b2 = 0.5 * B
    _tab_band_check(mod, b2)
    nu = s.imag
    sigma = s.real
    if sigma == 0.0 and abs(abs(nu) - b2) < 1e-9 * B:
        raise QuadratureError("evaluation too close to the band-edge singularity")

    kinks = _kink_points(mod, b2)
    core = None
    gap = None
    if abs(nu) < b2:
        fpl, fppl, fpr, fppr = _phase_sides(mod, nu)
        dc = min(_curv_halfwidth(mod), b2 / 4.0)
        dc = min(dc, 0.25 / max(abs(fpl), abs(fpr), 1e-300))
        others = kinks[np.abs(kinks - nu) > 1e-12 * B]
        if others.size:
            dc = min(dc, 0.9 * np.min(np.abs(others - nu)))
        dc = max(dc, 1e-13 * B)
        u_lo = max(-dc, -b2 - nu)
        u_hi = min(dc, b2 - nu)
        core = CauchyCore(nu, u_lo, u_hi, phase_eval(mod, nu), fpl, fppl, fpr, fppr)
        gap = (nu + u_lo, nu + u_hi)

    hw = min(_curv_halfwidth(mod), b2 / 8.0)
    dmin = max(0.5 * abs(sigma), 1e-13 * B)
    pieces = []
    for p, q in _segments(mod, b2, gap):
        pieces.append(oscquad.graded_edges(p, q, nu, dmin, 2.0 * hw))
    if pieces:
        pairs = np.concatenate(
            [np.stack([e[:-1], e[1:]], axis=1) for e in pieces], axis=0
        )
        pairs = pairs[pairs[:, 1] > pairs[:, 0]]
        centers = 0.5 * (pairs[:, 0] + pairs[:, 1])
        half = 0.5 * (pairs[:, 1] - pairs[:, 0])
        f, fp, curv = _phase_arrays(mod, centers)
        panels = PanelSet(centers, half, f, fp, curv)
    else:
        panels = PanelSet(*(np.array([]) for _ in range(5)))
    return oscquad.eval_cauchy(panels, core, complex(s))


def kernel_laplace_numeric(mod: PhaseModulation, B, s) -> KernelValue:
    """Laplace-domain kernel by the single band integral.

    Requires Re s >= 0 (Re s = 0 is the boundary value from the right).
    Analytic continuation into Re s < 0 is the pole search's job, not this
    function's.
    """
    b = as_bandwidth(B)
    s = complex(s)
    if s.real < 0.0:
        raise ValueError("kernel_laplace_numeric requires Re s >= 0")
    if mod.is_trivial:
        b2 = 0.5 * b
        if s == 0.0:
            return KernelValue(1.0 + 0.0j, "analytic", 0.0)
        val = (1j / np.pi) * (np.log(s - 1j * b2) - np.log(s + 1j * b2))
        return KernelValue(complex(val), "analytic", 0.0)
    raw, err = _band_cauchy(mod, b, s)
    val = raw / np.pi
    err = err / np.pi + 1e-12
    if err > 1e-6:
        raise QuadratureError(
            f"Laplace-kernel quadrature error estimate {err:.3e} exceeds 1e-6"
        )
    return KernelValue(complex(val), "quadrature", float(err))


def kernel_first_moment(mod: PhaseModulation, B) -> KernelValue:
    """First kernel moment k1 = int_0^inf t k(t) dt = -d kt/ds at s -> 0+.

    Evaluated by Richardson extrapolation of -kt'(s_j) at s_j = s0/2^j with
    central differencing in the imaginary direction.  For profiles with a
    phase kink at w = 0 (linear, generic tabulated) the imaginary part
    diverges logarithmically as s -> 0; that is detected and reported via a
    ModulationWarning while the convergent real part is still returned.
    """
    b = as_bandwidth(B)
    if mod.is_trivial:
        # -d/ds of the closed-form band kernel at s = 0
        return KernelValue(complex(4.0 / (np.pi * b)), "analytic", 0.0)

    def deriv(s0: float) -> complex:
        h = 1e-3 * s0
        kp = kernel_laplace_numeric(mod, b, complex(s0, h)).value
        km = kernel_laplace_numeric(mod, b, complex(s0, -h)).value
        return -(kp - km) / (2j * h)

    # expansion point small on the kernel's own time scale, yet well above
    # differencing noise
    if mod.kind == "tabulated":
        tau = float(np.max(np.abs(_tab_slope(mod, mod.table_omega[1:]))))
    else:
        tau = mod.T
    s0 = min(10.0 / b, 0.02 / max(tau, 1e-300))
    d0, d1, d2 = deriv(s0), deriv(0.5 * s0), deriv(0.25 * s0)
    r1 = 2.0 * d1 - d0
    r1b = 2.0 * d2 - d1
    r2 = (4.0 * r1b - r1) / 3.0
    err_re = abs(r2.real - r1b.real)
    err_im = abs(r2.imag - r1b.imag)
    scale = max(abs(r2), 1e-300)
    if err_im > 1e-3 * scale:
        warnings.warn(
            "first-moment imaginary part is not converging (logarithmic in s); "
            "only the real part is reliable",
            ModulationWarning,
            stacklevel=2,
        )
    if err_re > 1e-2 * scale:
        raise QuadratureError("first kernel moment did not converge")
    return KernelValue(complex(r2), "quadrature", float(err_re + err_im))
