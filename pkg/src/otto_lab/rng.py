"""SplitMix64, a small 64-bit generator with a fixed, language-neutral definition.

All randomness in the runner flows from one integer seed through this
generator, so a scenario reproduces bit for bit in any implementation of the
same algorithm.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self):
        """Double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_array(self, size, low=0.0, high=1.0):
        u = np.array([self.uniform() for _ in range(int(np.prod(size)))])
        return low + (high - low) * u.reshape(size)
