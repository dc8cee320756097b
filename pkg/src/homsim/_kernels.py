"""Hot inner loops, each in a pure-numpy and a numba flavour.

The backend is picked once at import time from the ``HOMSIM_BACKEND``
environment variable:

``auto`` (default)
    numba when it imports, numpy otherwise.
``numba``
    require numba; raise ImportError if it is missing.
``numpy``
    never touch numba.

Both flavours of every kernel are importable directly (``*_numpy`` and
``*_numba``) so tests and the benchmark can compare them side by side.
Reductions run in a fixed index order, so each backend is bit-reproducible
on its own; the two backends agree to a few ulp (libm vs. numpy SIMD
transcendental functions).
"""

from __future__ import annotations

import os

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TO_UNIT = 2.0**-53

# Rough upper bound on elements per temporary in the numpy path.
_CHUNK_ELEMENTS = 1 << 22


def _requested_backend() -> str:
    name = os.environ.get("HOMSIM_BACKEND", "auto").strip().lower()
    if name not in {"auto", "numba", "numpy"}:
        raise ImportError(f"HOMSIM_BACKEND must be auto, numba or numpy, got {name!r}")
    return name


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships in the dev image
    numba = None
    HAVE_NUMBA = False

_requested = _requested_backend()
if _requested == "numba" and not HAVE_NUMBA:
    raise ImportError("HOMSIM_BACKEND=numba but numba is not installed")
BACKEND = "numba" if (HAVE_NUMBA and _requested != "numpy") else "numpy"


def stream_key(seed: int, stream: int) -> np.uint64:
    """Fold an arbitrary Python integer seed and a stream id into a 64-bit key."""
    s = (int(seed) * 0x2545F4914F6CDD1D + int(stream) * 0x9E3779B97F4A7C15) % (1 << 64)
    return _splitmix_scalar(np.uint64(s))


def _splitmix_scalar(z: np.uint64) -> np.uint64:
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        return z ^ (z >> _S31)


# --------------------------------------------------------------------------
# counter-based uniforms
# --------------------------------------------------------------------------


def counter_uniforms_numpy(key: np.uint64, start: int, count: int) -> np.ndarray:
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + (idx + np.uint64(1)) * _GOLDEN
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        z = z ^ (z >> _S31)
    return ((z >> _S11).astype(np.float64) + 0.5) * _TO_UNIT


def _counter_uniforms_py(key, start, count):
    out = np.empty(count, dtype=np.float64)
    one = np.uint64(1)
    for i in range(count):
        z = key + (np.uint64(start + i) + one) * _GOLDEN
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        z = z ^ (z >> _S31)
        out[i] = (np.float64(z >> _S11) + 0.5) * _TO_UNIT
    return out


# --------------------------------------------------------------------------
# ensemble coincidence moments
# --------------------------------------------------------------------------


def coincidence_moments_numpy(delta_f, taus, shifted, block):
    """Mean and standard error of the per-pair coincidence at each delay.

    Pairs are grouped in consecutive blocks of ``block`` (2 for antithetic
    couples); the standard error is taken over block means.
    """
    delta_f = np.asarray(delta_f, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    n = delta_f.size
    groups = n // block
    mean = np.empty(taus.size)
    stderr = np.empty(taus.size)
    step = max(1, _CHUNK_ELEMENTS // max(n, 1))
    for lo in range(0, taus.size, step):
        t = taus[lo : lo + step]
        phase = np.multiply.outer(t, delta_f)
        y = np.sin(phase) if shifted else np.cos(phase)
        y *= y
        g = y.reshape(t.size, groups, block).mean(axis=2)
        mean[lo : lo + step] = g.mean(axis=1)
        if groups > 1:
            stderr[lo : lo + step] = g.std(axis=1, ddof=1) / np.sqrt(groups)
        else:
            stderr[lo : lo + step] = 0.0
    return mean, stderr


def _coincidence_moments_py(delta_f, taus, shifted, block):
    n = delta_f.shape[0]
    groups = n // block
    mean = np.empty(taus.shape[0])
    stderr = np.empty(taus.shape[0])
    g = np.empty(groups)
    for t in range(taus.shape[0]):
        tau = taus[t]
        total = 0.0
        for k in range(groups):
            acc = 0.0
            for b in range(block):
                x = delta_f[k * block + b] * tau
                y = np.sin(x) if shifted else np.cos(x)
                acc += y * y
            g[k] = acc / block
            total += g[k]
        m = total / groups
        ss = 0.0
        for k in range(groups):
            d = g[k] - m
            ss += d * d
        mean[t] = m
        stderr[t] = np.sqrt(ss / (groups - 1) / groups) if groups > 1 else 0.0
    return mean, stderr


# --------------------------------------------------------------------------
# two-photon exchange overlap
# --------------------------------------------------------------------------


def exchange_overlap_numpy(kernel, points, taus):
    """sum_ij K_ij exp(i (w_i - w_j) tau) for each tau."""
    taus = np.asarray(taus, dtype=np.float64)
    out = np.empty(taus.size, dtype=np.complex128)
    n = points.size
    step = max(1, _CHUNK_ELEMENTS // max(n, 1))
    for lo in range(0, taus.size, step):
        e = np.exp(1j * np.multiply.outer(taus[lo : lo + step], points))
        out[lo : lo + step] = np.sum((e @ kernel) * e.conj(), axis=1)
    return out


def _exchange_overlap_py(kernel, points, taus):
    # One BLAS matvec per delay; a hand-written double loop was ~3x slower.
    out = np.empty(taus.shape[0], dtype=np.complex128)
    for t in range(taus.shape[0]):
        phase = np.exp(1j * points * taus[t])
        out[t] = np.dot(phase, np.dot(kernel, np.conj(phase)))
    return out


if HAVE_NUMBA:
    counter_uniforms_numba = numba.njit(cache=True)(_counter_uniforms_py)
    coincidence_moments_numba = numba.njit(cache=True)(_coincidence_moments_py)
    exchange_overlap_numba = numba.njit(cache=True)(_exchange_overlap_py)
else:  # pragma: no cover
    counter_uniforms_numba = None
    coincidence_moments_numba = None
    exchange_overlap_numba = None


def counter_uniforms(key, start, count):
    """Uniform doubles in the open interval (0, 1) keyed by ``key`` at counters start..start+count-1."""
    if BACKEND == "numba":
        return counter_uniforms_numba(np.uint64(key), int(start), int(count))
    return counter_uniforms_numpy(np.uint64(key), int(start), int(count))


def coincidence_moments(delta_f, taus, shifted, block):
    delta_f = np.ascontiguousarray(delta_f, dtype=np.float64)
    taus = np.ascontiguousarray(taus, dtype=np.float64)
    if BACKEND == "numba":
        return coincidence_moments_numba(delta_f, taus, bool(shifted), int(block))
    return coincidence_moments_numpy(delta_f, taus, bool(shifted), int(block))


def exchange_overlap(kernel, points, taus):
    kernel = np.ascontiguousarray(kernel, dtype=np.complex128)
    points = np.ascontiguousarray(points, dtype=np.float64)
    taus = np.ascontiguousarray(taus, dtype=np.float64)
    if BACKEND == "numba":
        return exchange_overlap_numba(kernel, points, taus)
    return exchange_overlap_numpy(kernel, points, taus)
