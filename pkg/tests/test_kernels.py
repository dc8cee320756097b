import numpy as np
import pytest

from homsim import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_uniforms_open_unit_interval():
    u = _kernels.counter_uniforms_numpy(_kernels.stream_key(1, 0), 0, 200_000)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 5 / np.sqrt(12 * u.size)


def test_uniforms_are_counter_based():
    key = _kernels.stream_key(42, 3)
    whole = _kernels.counter_uniforms_numpy(key, 0, 1000)
    pieces = np.concatenate([
        _kernels.counter_uniforms_numpy(key, lo, 100) for lo in range(0, 1000, 100)
    ])
    assert np.array_equal(whole, pieces)


def test_stream_keys_distinct():
    keys = {int(_kernels.stream_key(s, t)) for s in range(-5, 50) for t in range(4)}
    assert len(keys) == 55 * 4


def test_huge_and_negative_seeds_accepted():
    for seed in (-1, 2**100, -(2**70)):
        u = _kernels.counter_uniforms_numpy(_kernels.stream_key(seed, 0), 0, 10)
        assert np.all((u > 0) & (u < 1))


@needs_numba
def test_uniforms_backends_bit_identical():
    key = _kernels.stream_key(7, 1)
    a = _kernels.counter_uniforms_numpy(key, 17, 5000)
    b = _kernels.counter_uniforms_numba(key, 17, 5000)
    assert np.array_equal(a, b)


@needs_numba
@pytest.mark.parametrize("shifted", [True, False])
@pytest.mark.parametrize("block", [1, 2])
def test_moments_backends_agree(shifted, block):
    rng = np.random.default_rng(3)
    df = rng.normal(size=2000)
    taus = np.linspace(0, 5, 23)
    m1, s1 = _kernels.coincidence_moments_numpy(df, taus, shifted, block)
    m2, s2 = _kernels.coincidence_moments_numba(df, taus, shifted, block)
    np.testing.assert_allclose(m1, m2, rtol=0, atol=1e-14)
    np.testing.assert_allclose(s1, s2, rtol=1e-10, atol=1e-16)


def test_moments_match_direct_statistics():
    rng = np.random.default_rng(5)
    df = rng.normal(size=600)
    taus = np.array([0.3, 1.7])
    mean, err = _kernels.coincidence_moments_numpy(df, taus, True, 2)
    for i, t in enumerate(taus):
        y = np.sin(df * t) ** 2
        g = y.reshape(-1, 2).mean(axis=1)
        assert mean[i] == pytest.approx(y.mean(), abs=1e-15)
        assert err[i] == pytest.approx(g.std(ddof=1) / np.sqrt(g.size), rel=1e-12)


def test_moments_chunking_invariant(monkeypatch):
    rng = np.random.default_rng(9)
    df = rng.normal(size=100)
    taus = np.linspace(0, 3, 40)
    ref = _kernels.coincidence_moments_numpy(df, taus, True, 2)
    monkeypatch.setattr(_kernels, "_CHUNK_ELEMENTS", 150)
    chunked = _kernels.coincidence_moments_numpy(df, taus, True, 2)
    assert np.array_equal(ref[0], chunked[0]) and np.array_equal(ref[1], chunked[1])


def _overlap_brute(kernel, points, taus):
    return np.array([
        sum(kernel[i, j] * np.exp(1j * (points[i] - points[j]) * t)
            for i in range(points.size) for j in range(points.size))
        for t in taus
    ])


@pytest.mark.parametrize("flavour", ["numpy", "numba"])
def test_exchange_overlap_against_brute_force(flavour):
    if flavour == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(11)
    k = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    pts = np.sort(rng.normal(size=9))
    taus = np.array([0.0, 0.4, 2.5])
    fn = getattr(_kernels, f"exchange_overlap_{flavour}")
    np.testing.assert_allclose(fn(k, pts, taus), _overlap_brute(k, pts, taus), atol=1e-12)


def test_backend_flag_selects_numpy(monkeypatch):
    import importlib

    monkeypatch.setenv("HOMSIM_BACKEND", "numpy")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "numpy"
    finally:
        monkeypatch.delenv("HOMSIM_BACKEND")
        importlib.reload(_kernels)


def test_backend_flag_rejects_unknown(monkeypatch):
    import importlib

    monkeypatch.setenv("HOMSIM_BACKEND", "cuda")
    try:
        with pytest.raises(ImportError):
            importlib.reload(_kernels)
    finally:
        monkeypatch.delenv("HOMSIM_BACKEND")
        importlib.reload(_kernels)


def test_benchmark_script_runs(capsys):
    import runpy
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    mod = runpy.run_path(str(path))
    mod["main"](["--pairs", "200", "--taus", "3", "--grid", "9", "--repeat", "1"])
    out = capsys.readouterr().out
    for name in ("counter_uniforms", "coincidence_moments", "exchange_overlap"):
        assert name in out
