"""Counter-based random numbers for reproducible parallel Monte Carlo.

The generator is Philox4x64-10: a bijective mixing function from a 256-bit
counter and a 128-bit key to four 64-bit words.  Because every draw is
addressed by an explicit counter there is no sequential state, so any particle
range of any step can be (re)generated independently, in any order, on any
number of threads, with bit-identical results.

Key layout:   key = (seed, stream)   -- stream separates independent uses
Counter:      (index, index2, 0, 0)  -- e.g. (particle, step) for path noise

The block function matches numpy's Philox bit generator word for word (numpy
pre-increments its counter once before emitting, which the tests account
for), giving an independent reference for the vectorized implementation.
"""

import numpy as np

PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
PHILOX_M1 = np.uint64(0xCA5A826395121157)
PHILOX_W0 = np.uint64(0x9E3779B97F4A7C15)
PHILOX_W1 = np.uint64(0xBB67AE8584CAA73B)

_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = (1 << 64) - 1
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_INV53 = float(2.0**-53)

# stream identifiers used across the package
STREAM_PATH_NOISE = 0
STREAM_JUTTNER = 1


def _mulhilo_into(a, b, hi, lo, t1, t2, t3):
    """Full 64x64->128 product of scalar a with array b, written into hi, lo."""
    np.multiply(a, b, out=lo)
    a_lo = a & _MASK32
    a_hi = a >> _S32
    np.bitwise_and(b, _MASK32, out=t1)      # b_lo
    np.right_shift(b, _S32, out=t2)         # b_hi
    np.multiply(t1, a_lo, out=t3)
    np.right_shift(t3, _S32, out=t3)        # carry of the low product
    np.multiply(t1, a_hi, out=t1)
    np.add(t1, t3, out=t1)                  # a_hi*b_lo + carry
    np.multiply(t2, a_lo, out=t3)
    np.bitwise_and(t1, _MASK32, out=hi)
    np.add(t3, hi, out=t3)                  # a_lo*b_hi + (t1 & mask)
    np.multiply(t2, a_hi, out=hi)
    np.right_shift(t1, _S32, out=t1)
    np.add(hi, t1, out=hi)
    np.right_shift(t3, _S32, out=t3)
    np.add(hi, t3, out=hi)


def philox4x64(c0, c1, c2, c3, key0, key1, rounds=10):
    """Apply the Philox4x64 block function to arrays of counters.

    Counter arguments broadcast against each other; returns four uint64
    output arrays.
    """
    shape = np.broadcast_shapes(
        np.shape(c0), np.shape(c1), np.shape(c2), np.shape(c3)
    )
    state = [np.empty(shape, dtype=np.uint64) for _ in range(4)]
    for buf, val in zip(state, (c0, c1, c2, c3)):
        buf[...] = np.asarray(val, dtype=np.uint64)
    scratch = [np.empty(shape, dtype=np.uint64) for _ in range(7)]
    _philox_rounds(state, scratch, np.uint64(key0 & _MASK64), np.uint64(key1 & _MASK64), rounds)
    return tuple(state)


def _philox_rounds(state, scratch, k0, k1, rounds=10):
    c0, c1, c2, c3 = state
    hi0, lo0, hi1, lo1, ta, tb, tc = scratch
    with np.errstate(over="ignore"):
        for _ in range(rounds):
            _mulhilo_into(PHILOX_M0, c0, hi0, lo0, ta, tb, tc)
            _mulhilo_into(PHILOX_M1, c2, hi1, lo1, ta, tb, tc)
            np.bitwise_xor(hi1, c1, out=c0)
            np.bitwise_xor(c0, k0, out=c0)
            c1, lo1 = lo1, c1
            np.bitwise_xor(hi0, c3, out=c2)
            np.bitwise_xor(c2, k1, out=c2)
            c3, lo0 = lo0, c3
            k0 = k0 + PHILOX_W0
            k1 = k1 + PHILOX_W1
    state[0], state[1], state[2], state[3] = c0, c1, c2, c3
    scratch[0], scratch[1], scratch[2], scratch[3] = hi0, lo0, hi1, lo1


def uint64_to_unit(x):
    """Map uint64 words to doubles in the half-open interval (0, 1]."""
    return (np.asarray(x >> _S11, dtype=np.float64) + 1.0) * _INV53


def _normals_from_words(w0, w1, w2, w3):
    """Box-Muller: three standard normals from the four words of one block."""
    u0 = uint64_to_unit(w0)
    u1 = uint64_to_unit(w1)
    u2 = uint64_to_unit(w2)
    u3 = uint64_to_unit(w3)
    r0 = np.sqrt(-2.0 * np.log(u0))
    t0 = 2.0 * np.pi * u1
    r1 = np.sqrt(-2.0 * np.log(u2))
    t1 = 2.0 * np.pi * u3
    return np.stack([r0 * np.cos(t0), r0 * np.sin(t0), r1 * np.cos(t1)], axis=-1)


class CounterRng:
    """Stateless counter-addressed random source for one (seed, stream) pair."""

    def __init__(self, seed, stream=0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64

    def words(self, index, index2=0):
        """Four raw uint64 words per counter (index, index2, 0, 0)."""
        return philox4x64(index, index2, 0, 0, self.seed, self.stream)

    def uniforms4(self, index, index2=0):
        """Four uniforms in (0,1) per counter, shape (..., 4)."""
        return np.stack([uint64_to_unit(w) for w in self.words(index, index2)], axis=-1)

    def normals3(self, index, index2=0):
        """Three standard normal deviates per counter, shape (..., 3)."""
        return _normals_from_words(*self.words(index, index2))


# particles per noise block; deviates of a particle depend only on its block
NOISE_PARTICLE_BLOCK = 8192


class NoiseStream:
    """Deterministic map (seed, particle, step) -> 3 standard normals.

    Particles are grouped into fixed blocks of NOISE_PARTICLE_BLOCK; block b
    of step s draws its normals from a Philox generator counter-addressed at
    (0, step, block, 0) with key (seed, stream).  A particle's deviates
    therefore depend only on (seed, particle, step) -- never on the ensemble
    size, the requested range, the thread count, or generation order.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _MASK64
        self.stream = STREAM_PATH_NOISE

    def _block(self, step, b):
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        counter = np.array([0, step, b, 0], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(counter=counter, key=key))
        return gen.standard_normal(3 * NOISE_PARTICLE_BLOCK).reshape(NOISE_PARTICLE_BLOCK, 3)

    def normals(self, step, lo, hi):
        """Deviates for particles [lo, hi) at one step, shape (hi-lo, 3)."""
        if not 0 <= lo < hi:
            raise ValueError("need 0 <= lo < hi")
        b0 = lo // NOISE_PARTICLE_BLOCK
        b1 = (hi - 1) // NOISE_PARTICLE_BLOCK
        parts = [self._block(step, b) for b in range(b0, b1 + 1)]
        out = parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)
        base = b0 * NOISE_PARTICLE_BLOCK
        return out[lo - base : hi - base]
