"""Counter-based common randomness shared by the encoder and every decoder.

A uniform in [0, 1) is a pure function of (seed, session, block, layer,
index), so any party can regenerate the value used at a given position
without replaying a stream.  The mixing function is the splitmix64
finalizer.
"""

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
LAYER_IDS = {"W": 0, "V": 1, "X": 2}


def _mix(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, sessions, block: int, layer: str, N: int) -> np.ndarray:
    """(len(sessions), N) array of shared uniforms."""
    sessions = np.atleast_1d(np.asarray(sessions, dtype=np.uint64))
    with np.errstate(over="ignore"):
        h = _mix(np.array([seed], dtype=np.uint64))
        h = _mix(h ^ np.uint64(block) ^ (np.uint64(LAYER_IDS[layer]) << np.uint64(40)))
        h = _mix(h ^ sessions)
        h = _mix(h[:, None] ^ np.arange(N, dtype=np.uint64)[None, :])
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
