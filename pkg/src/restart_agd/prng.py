"""Counter-based splitmix64 generator.

All random problem data is drawn from this stream so that a (seed, size)
pair pins the generated problem exactly, independent of numpy's own
generators.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def _mix(z):
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class Prng:
    """splitmix64 with uniform and Box-Muller normal draws.

    The scalar methods and the ``*_array`` methods consume the stream in
    the same order, so ``uniform_array(n)`` equals ``n`` calls to
    ``uniform01``.
    """

    def __init__(self, seed=0):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + GAMMA) & MASK64
        return _mix(self.state)

    def uniform01(self):
        """Uniform on [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def normal_pair(self):
        u1 = self.uniform01()
        while u1 == 0.0:
            u1 = self.uniform01()
        u2 = self.uniform01()
        rad = math.sqrt(-2.0 * math.log(u1))
        ang = 2.0 * math.pi * u2
        return rad * math.cos(ang), rad * math.sin(ang)

    def u64_array(self, n):
        with np.errstate(over="ignore"):
            steps = np.arange(1, n + 1, dtype=np.uint64)
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GAMMA) & MASK64
        return z

    def uniform_array(self, n):
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normal_array(self, n):
        """``n`` standard normals; an odd count discards the last sine output."""
        pairs = (n + 1) // 2
        saved = self.state
        u = self.uniform_array(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        if np.any(u1 == 0.0):
            # a zero radius draw shifts the stream; redo it one pair at a time
            self.state = saved
            out = np.empty(2 * pairs)
            for i in range(pairs):
                out[2 * i], out[2 * i + 1] = self.normal_pair()
            return out[:n]
        rad = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = rad * np.cos(ang)
        out[1::2] = rad * np.sin(ang)
        return out[:n]
