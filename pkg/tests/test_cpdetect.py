import numpy as np
import pytest

import oracles
from hdustat.cpdetect import (
    DriftSpec,
    check_geometric_constraints,
    cusum_process,
    cusum_statistic,
    detect_change,
    drift_V,
)
from hdustat.errors import InputError
from hdustat.gaussmc import RngSpec
from hdustat.kernels import KernelSpec
from hdustat.sample import SeqPath

GMD = KernelSpec("gmd")


def test_cusum_matches_oracle(spec, rng):
    for _ in range(50):
        n = int(rng.integers(4, 11))
        x = rng.standard_normal((n, int(rng.integers(1, 3)))) * 2.0
        path = cusum_process(x, spec)
        assert path.ks.tolist() == list(range(2, n - 1))
        assert oracles.relative_error(path.values, oracles.cusum(x, spec)) <= 1e-10


def test_cusum_n9_oracle(rng):
    x = rng.standard_normal((9, 2))
    np.testing.assert_allclose(cusum_process(x, GMD).values, oracles.cusum(x, GMD), rtol=1e-10, atol=1e-12)


def test_reversal_antisymmetry(spec, rng):
    for _ in range(20):
        n = int(rng.integers(6, 30))
        x = rng.standard_normal((n, 2))
        fwd, rev = cusum_process(x, spec), cusum_process(x[::-1], spec)
        for k in range(2, n - 1):
            np.testing.assert_allclose(rev[n - k], -fwd[k], rtol=1e-10, atol=1e-12)
        t_fwd, k_fwd = cusum_statistic(fwd)
        t_rev, k_rev = cusum_statistic(rev)
        assert t_rev == pytest.approx(t_fwd, rel=1e-10)


def test_exactly_one_kernel_evaluation_per_pair(monkeypatch, rng):
    import hdustat.useq as useq

    counted = []
    original = useq.kernel_rows

    def counting(spec, x, others):
        counted.append(len(others))
        return original(spec, x, others)

    monkeypatch.setattr(useq, "kernel_rows", counting)
    cusum_process(rng.standard_normal((31, 2)), GMD)
    assert sum(counted) == 31 * 30 // 2


def test_constant_sample():
    x = np.full((12, 3), -4.0)
    path = cusum_process(x, GMD)
    np.testing.assert_array_equal(path.values, 0.0)
    res = detect_change(x, GMD, 0.05, 1000, RngSpec(0))
    assert res.T_n == 0.0 and res.q == 0.0 and not res.reject
    assert res.k_hat == 2


def test_statistic_tie_break_and_peak():
    assert cusum_statistic(SeqPath(np.zeros((5, 2)), 2, 6, 8)) == (0.0, 2)
    values = np.zeros((6, 1))
    values[3] = 2.0
    values[5] = -2.0
    assert cusum_statistic(SeqPath(values, 2, 7, 9)) == (2.0, 5)


def test_input_validation(rng):
    with pytest.raises(InputError):
        cusum_process(rng.standard_normal((3, 1)), GMD)
    with pytest.raises(InputError):
        detect_change(rng.standard_normal((4, 1)), GMD)
    with pytest.raises(InputError):
        detect_change(rng.standard_normal((10, 1)), GMD, n_paths=500)
    with pytest.raises(InputError):
        detect_change(rng.standard_normal((10, 1)), GMD, alpha=1.0)


def test_detect_change_deterministic_and_thread_free(rng):
    x = rng.standard_normal((60, 2))
    a = detect_change(x, GMD, 0.05, 2000, RngSpec(3), threads=1)
    b = detect_change(x, GMD, 0.05, 2000, RngSpec(3), threads=3)
    assert a.q == b.q and a.T_n == b.T_n
    assert a.bridge_paths_used == 2000
    assert a.lambda_min > 0 and a.clipped_mass == 0.0


def test_detect_change_finds_strong_break(rng):
    x = rng.standard_normal((200, 2))
    x[120:] *= 3.0
    res = detect_change(x, GMD, 0.05, 2000, RngSpec(1))
    assert res.reject
    assert abs(res.tau_hat - 0.6) <= 0.05


def _drift(mu12_of, tau=0.5):
    mu1, mu2 = np.array([1.0, 0.0]), np.array([3.0, 1.0])
    return DriftSpec(mu1, mu2, mu12_of(mu1, mu2), tau)


def test_drift_at_break_equals_tau_one_minus_tau():
    for tau in (0.2, 0.5, 0.7):
        spec = _drift(lambda a, b: np.array([5.0, -1.0]), tau)
        assert drift_V(spec, tau) == pytest.approx(tau * (1 - tau), rel=1e-14)


def test_drift_continuity_at_break():
    spec = _drift(lambda a, b: np.array([0.3, 2.0]), 0.4)
    assert abs(drift_V(spec, 0.4 - 1e-9) - drift_V(spec, 0.4 + 1e-9)) <= 1e-6


def test_drift_vanishes_at_ends():
    spec = _drift(lambda a, b: (a + b) / 2)
    assert drift_V(spec, 1e-9) < 1e-8
    assert drift_V(spec, 1 - 1e-9) < 1e-8
    with pytest.raises(InputError):
        drift_V(spec, 0.0)


def test_drift_midpoint_cross_mean_peaks_at_break():
    spec = _drift(lambda a, b: (a + b) / 2)
    t = np.arange(1, 100) / 100
    v = [drift_V(spec, s) for s in t]
    assert t[int(np.argmax(v))] == 0.5


def test_geometric_constraints():
    assert check_geometric_constraints(_drift(lambda a, b: (a + b) / 2))
    assert check_geometric_constraints(_drift(lambda a, b: a))
    assert not check_geometric_constraints(_drift(lambda a, b: a - (b - a), tau=0.9))


def test_drift_spec_validation():
    with pytest.raises(InputError):
        DriftSpec([1.0], [1.0], [0.0], 0.5)
    with pytest.raises(InputError):
        DriftSpec([1.0], [2.0], [0.0], 1.0)
    with pytest.raises(InputError):
        DriftSpec([1.0, 2.0], [2.0], [0.0], 0.5)


def _median_location_error(n, reps, seed):
    gen = np.random.default_rng(seed)
    errs = []
    for _ in range(reps):
        x = gen.standard_normal((n, 4))
        x[n // 2:] *= 1.5  # moves the GMD parameter; a location shift would not
        errs.append(abs(cusum_statistic(cusum_process(x, GMD))[1] / n - 0.5))
    return float(np.median(errs))


def test_tau_hat_concentrates():
    small = _median_location_error(200, 50, 300)
    large = _median_location_error(400, 50, 500)
    assert large <= small / 2 + 1e-12
