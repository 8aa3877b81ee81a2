import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqbath.cerf import OverflowSignal, erfc_complex, faddeeva, log_erfc

from oracles import erfc_series_mp, faddeeva_cf_mp, faddeeva_series_mp, erfc_mp_builtin

# Frozen oracle values (erfc Taylor series with >= 50 terms; Laplace continued
# fraction in extended precision; both confirmed against mpmath.erfc).
ERFC_1 = 0.15729920705028513
W_100I = 0.005641613782989433
W_1P1J = 0.3047442052569126 + 0.20821893820283163j


def test_erfc_at_zero():
    assert erfc_complex(0.0) == pytest.approx(1.0, abs=1e-14)


def test_faddeeva_at_zero():
    assert faddeeva(0.0) == pytest.approx(1.0, abs=1e-14)


def test_erfc_of_one_matches_series_oracle():
    assert abs(erfc_complex(1.0) - ERFC_1) < 1e-12
    # re-run the oracle to keep it honest
    assert abs(erfc_series_mp(1.0) - ERFC_1) < 1e-15


def test_faddeeva_100i_matches_cf_oracle():
    got = faddeeva(100j)
    assert abs(got - W_100I) < 1e-12 * abs(W_100I)
    assert abs(faddeeva_cf_mp(100j) - W_100I) < 1e-15
    # asymptotic w(iy) ~ 1/(sqrt(pi) y) sanity
    assert got.real == pytest.approx(1.0 / (np.sqrt(np.pi) * 100.0), rel=1e-4)


def test_faddeeva_1p1j_matches_series_oracle():
    assert abs(faddeeva(1 + 1j) - W_1P1J) < 1e-12
    assert abs(faddeeva_series_mp(1 + 1j) - W_1P1J) < 1e-14


def test_oracles_agree_in_overlap_band():
    # series and continued fraction are independent routes; they must agree
    # where both converge (moderate |z|, safely off the real axis)
    for z in (8 + 3j, -6 + 6j, 10j, 5 + 5j):
        a = faddeeva_series_mp(z, dps=90)
        b = faddeeva_cf_mp(z, depth=400, dps=60)
        assert abs(a - b) < 1e-20 + 1e-13 * abs(a)


def test_reflection_identity_random_grid():
    rng = np.random.default_rng(2024)
    z = (rng.uniform(-5, 5, 100) + 1j * rng.uniform(-5, 5, 100))
    lhs = erfc_complex(z) + erfc_complex(-z)
    assert np.all(np.abs(lhs - 2.0) < 1e-10)


def test_conjugation_symmetry():
    rng = np.random.default_rng(11)
    z = rng.uniform(-4, 4, 60) + 1j * rng.uniform(-4, 4, 60)
    a = erfc_complex(np.conj(z))
    b = np.conj(erfc_complex(z))
    assert np.all(np.abs(a - b) <= 1e-12 * (1.0 + np.abs(b)))


def test_faddeeva_imaginary_axis_is_real():
    y = np.logspace(-4, 4, 40)
    w = faddeeva(1j * y)
    assert np.all(np.abs(w.imag) <= 1e-12 * np.abs(w.real))


def test_oracle_equivalence_log_grid():
    # |z| in [1e-3, 1e3], arg in [0, pi]; series oracle for moderate |z|,
    # continued fraction for large |z|
    for r in np.logspace(-3, 3, 13):
        for arg in np.linspace(0.0, np.pi, 7):
            z = r * np.exp(1j * arg)
            if r <= 8.0:
                ref = faddeeva_series_mp(z, dps=80)
            else:
                ref = faddeeva_cf_mp(z, depth=300, dps=60)
            got = faddeeva(z)
            assert abs(got - ref) <= 1e-8 * abs(ref), f"z={z}"


def test_erfc_matches_mpmath_scan():
    rng = np.random.default_rng(5)
    z = rng.uniform(-6, 6, 50) + 1j * rng.uniform(-6, 6, 50)
    got = erfc_complex(z)
    ref = np.array([erfc_mp_builtin(zi, dps=60) for zi in z])
    assert np.all(np.abs(got - ref) <= 1e-10 * (np.abs(ref) + 1e-300))


def test_overflow_signal_raised():
    with pytest.raises(OverflowSignal):
        erfc_complex(1.0 + 40j)
    with pytest.raises(OverflowSignal):
        faddeeva(1.0 - 40j)


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        faddeeva(np.nan + 0j)
    with pytest.raises(ValueError):
        erfc_complex(np.inf)


def test_lower_half_plane_reflection():
    z = 2.0 - 1.5j
    w = faddeeva(z)
    ref = 2.0 * np.exp(-z * z) - faddeeva(-z)
    assert abs(w - ref) < 1e-13 * abs(w)


def test_log_erfc_consistency():
    for z in (0.5 + 0.5j, 3 - 2j, -2 + 1j, -1 - 3j, 5j, -4 - 4j):
        le = log_erfc(z)
        direct = erfc_mp_builtin(z, dps=60)
        assert abs(np.exp(le) - direct) < 1e-10 * abs(direct)


def test_log_erfc_extreme_sector():
    # |erfc| here is ~exp(y^2 - x^2) ~ e^360, far beyond double range
    z = -1.0 - 19.025j
    le = log_erfc(z)
    import mpmath as mp

    with mp.workdps(80):
        ref = mp.log(mp.erfc(mp.mpc(z)))
        assert abs(le.real - float(ref.real)) < 1e-8 * abs(float(ref.real))
        # args agree modulo 2 pi
        d = (le.imag - float(ref.imag)) % (2 * np.pi)
        assert min(d, 2 * np.pi - d) < 1e-8


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-4, 4, allow_nan=False),
    st.floats(-4, 4, allow_nan=False),
)
def test_reflection_property(x, y):
    z = complex(x, y)
    assert abs(erfc_complex(z) + erfc_complex(-z) - 2.0) < 1e-10


def test_array_and_scalar_paths_agree():
    z = np.array([0.3 + 0.1j, 4 + 2j, 100 - 3j, 1e-4 + 1e-4j, -7 + 0.01j])
    arr = faddeeva(z)
    sca = np.array([faddeeva(complex(v)) for v in z])
    assert np.all(np.abs(arr - sca) <= 1e-14 * np.abs(sca))
