"""Deterministic randomness for samplers, protocols and experiment trials.

All randomness in this package flows through :class:`PathRng`, a
counter-based generator built on keyed BLAKE2b.  A generator is addressed
by ``(master_seed, path)`` where ``path`` is a tuple of ints and short
strings naming a position in a larger computation (a node of a sampling
recursion tree, a (round, player) slot of a protocol run, a trial index of
a Monte Carlo sweep).  Two properties follow:

* identical ``(master_seed, path)`` always yields the identical stream,
  regardless of how many other generators were used in between, so
  subtrees of a recursive sampler are reproducible independently of
  traversal order and trials of a sweep can be re-run individually;
* distinct paths yield computationally independent streams.

Construction is cheap (one BLAKE2b key derivation), which matters because
samplers create one generator per recursion node.
"""

from __future__ import annotations

import hashlib

_U64 = 1 << 64


def _encode_path(parts: tuple) -> bytes:
    out = bytearray()
    for p in parts:
        if isinstance(p, int):
            out += b"i" + p.to_bytes(8, "little", signed=True)
        elif isinstance(p, str):
            raw = p.encode("utf-8")
            out += b"s" + len(raw).to_bytes(2, "little") + raw
        else:
            raise TypeError(f"path parts must be int or str, got {type(p).__name__}")
    return bytes(out)


def derive_key(master_seed: int, path: tuple = ()) -> bytes:
    """32-byte stream key for the generator at (master_seed, path)."""
    h = hashlib.blake2b(digest_size=32)
    h.update(master_seed.to_bytes(16, "little", signed=True))
    h.update(_encode_path(path))
    return h.digest()


def derive_seed(master_seed: int, *path) -> int:
    """A 64-bit integer sub-seed; the documented master-seed splitting scheme.

    Per-trial seeds of every Monte Carlo sweep come from
    ``derive_seed(master, "trial", index)`` so individual trials can be
    reproduced without re-running the whole sweep.
    """
    return int.from_bytes(derive_key(master_seed, tuple(path))[:8], "little")


class PathRng:
    """Counter-based deterministic random generator.

    The stream is ``BLAKE2b(key=K, data=counter)`` for counter 0, 1, ...,
    consumed 64 bits at a time.  Only the handful of integer primitives the
    package needs are exposed; all are unbiased (rejection sampling).
    """

    __slots__ = ("_key", "_counter", "_buf", "_pos")

    def __init__(self, master_seed: int, path: tuple = ()):
        self._key = derive_key(master_seed, path)
        self._counter = 0
        self._buf = b""
        self._pos = 64

    def _next64(self) -> int:
        if self._pos >= 64:
            self._buf = hashlib.blake2b(
                self._counter.to_bytes(8, "little"), key=self._key, digest_size=64
            ).digest()
            self._counter += 1
            self._pos = 0
        v = int.from_bytes(self._buf[self._pos : self._pos + 8], "little")
        self._pos += 8
        return v

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        if n == 1:
            return 0
        limit = _U64 - (_U64 % n)
        while True:
            v = self._next64()
            if v < limit:
                return v % n

    def randbits(self, k: int) -> str:
        """Uniform bit string of length k, as '0'/'1' characters."""
        return "".join("01"[self.randrange(2)] for _ in range(k))

    def sample(self, n: int, k: int) -> list[int]:
        """Uniform k-subset of range(n), in selection order (a uniform
        injection [k] -> [n] when order matters)."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        # sparse partial Fisher-Yates; O(k) space regardless of n
        repl: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randrange(n - i)
            out.append(repl.get(j, j))
            repl[j] = repl.get(i, i)
        return out

    def shuffle(self, xs: list) -> None:
        for i in range(len(xs) - 1, 0, -1):
            j = self.randrange(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def choice(self, xs):
        if not xs:
            raise IndexError("choice from empty sequence")
        return xs[self.randrange(len(xs))]
