"""Stateless counter-based randomness for reproducible parallel sampling.

Every random decision in the sampling pipeline is a pure function of
(master seed, sample index, edge index), so any partition of samples
across workers reproduces the same totals bit for bit.  The mixing
function is the splitmix64 finalizer, applied twice with distinct
stream constants between key injections.
"""

import numpy as np
from numba import njit

U64 = np.uint64

# splitmix64 golden-ratio increment and two unrelated odd constants
_GOLD = U64(0x9E3779B97F4A7C15)
_EDGE = U64(0xC2B2AE3D27D4EB4F)
_SALT_SAMPLE = U64(0xD1B54A32D192ED03)
_SALT_EDGE = U64(0x8CB92BA72F3D8DD7)

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def mix64(z):
    """splitmix64 finalizer; full-avalanche 64-bit mix."""
    z = U64(z)
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True)
def sample_key(master, index):
    """Key for one sample's stream; pure in (master, index)."""
    return mix64(U64(master) ^ (U64(index) * _GOLD ^ _SALT_SAMPLE))


@njit(cache=True)
def edge_uniform(key, edge):
    """Uniform in [0, 1) for one edge under a sample key."""
    h = mix64(U64(key) ^ (U64(edge) * _EDGE ^ _SALT_EDGE))
    return np.float64(h >> U64(11)) * _INV_2_53


_M64 = (1 << 64) - 1


def _mix64_int(z):
    """Python-int twin of mix64; identical bits, no numpy scalar warnings."""
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _mix64_np(z):
    """Array twin of mix64 over uint64 ndarrays."""
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


def edge_uniforms(master, index, edges):
    """Vectorized twin of edge_uniform over an array of edge indices.

    Bit-identical to the kernel-side scalar path; used by tests to
    materialize full graphs with the same coin flips the lazy sampler
    would have drawn.
    """
    key = _mix64_int((int(master) & _M64)
                     ^ ((int(index) * 0x9E3779B97F4A7C15) & _M64
                        ^ 0xD1B54A32D192ED03))
    h = _mix64_np(U64(key) ^ (np.asarray(edges, np.uint64) * _EDGE ^ _SALT_EDGE))
    return (h >> U64(11)) * _INV_2_53


def derive_seed(master, *tags):
    """Derive an independent 64-bit stream seed from a master seed.

    Distinct tag tuples give statistically independent streams; used to
    keep selection, evaluation, and per-round sampling uncorrelated.
    """
    z = int(master) & _M64
    for t in tags:
        z = _mix64_int(z ^ (((int(t) & _M64) * 0x9E3779B97F4A7C15) & _M64
                            ^ 0xD1B54A32D192ED03))
    return z
