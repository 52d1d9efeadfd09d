"""Element arithmetic, canonical keys and uniform samplers for four group
families: symmetric groups, SL2/PGL2 over a prime field, and automorphism
groups of the height-n rooted binary tree (iterated wreath products of Z/2).

Composition convention, shared by every module here: products read left to
right and act on points on the right, so (x*y)(i) = y(x(i)).  Fixing this
once pins the section formulas for tree automorphisms and the meaning of
word evaluation.

Element representations are plain immutable values:

* symmetric group: tuple of images, images[i] = image of point i
* SL2/PGL2: 4-tuple (a, b, c, d) of residues, row-major
* tree automorphisms: bytes of 0/1 activity bits, one per internal node,
  heap-indexed (root at index 1, children of v at 2v and 2v+1, byte v-1)
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

Perm = tuple[int, ...]
Mat = tuple[int, int, int, int]

__all__ = [
    "GroupContext",
    "SymmetricContext",
    "SL2Context",
    "PGL2Context",
    "WreathContext",
    "make_context",
    "is_prime",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class GroupContext:
    """Shared interface of the group families; see subclasses."""

    family: str
    algebraic_dim: int | None = None

    def multiply(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def identity(self):
        raise NotImplementedError

    def canonical_key(self, x) -> bytes:
        """Packed byte key; equal keys iff equal group elements."""
        raise NotImplementedError

    def sample_uniform(self, rng):
        """Exactly uniform element; residues are drawn by rejection."""
        raise NotImplementedError

    def validate(self, x) -> None:
        raise NotImplementedError

    def group_size(self) -> int:
        raise NotImplementedError

    def group_size_log2(self) -> float:
        raise NotImplementedError

    def order(self, x) -> int:
        """Least m >= 1 with x^m = identity.

        Fallback for matrix families: iterate the product with a cutoff at
        the group size (hitting the cutoff signals a bug, since the order
        divides the group size).
        """
        ident = self.identity()
        acc = x
        size = self.group_size()
        m = 1
        while acc != ident:
            acc = self.multiply(acc, x)
            m += 1
            if m > size:
                raise RuntimeError("order exceeded group size; arithmetic bug")
        return m

    def elements(self) -> Iterable:
        raise NotImplementedError(f"no enumeration for {self.family}")


@dataclass(frozen=True)
class SymmetricContext(GroupContext):
    n: int
    family = "sym"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("degree must be >= 1")

    def multiply(self, x: Perm, y: Perm) -> Perm:
        if len(x) != len(y) or len(x) != self.n:
            raise ValueError("degree mismatch")
        return tuple(y[v] for v in x)

    def invert(self, x: Perm) -> Perm:
        inv = [0] * len(x)
        for i, v in enumerate(x):
            inv[v] = i
        return tuple(inv)

    def identity(self) -> Perm:
        return tuple(range(self.n))

    def canonical_key(self, x: Perm) -> bytes:
        if self.n <= 255:
            return bytes(x)
        return struct.pack(f">{self.n}H", *x)

    def sample_uniform(self, rng) -> Perm:
        images = list(range(self.n))
        for i in range(self.n - 1, 0, -1):
            j = rng.randrange(i + 1)
            images[i], images[j] = images[j], images[i]
        return tuple(images)

    def validate(self, x) -> None:
        if len(x) != self.n or sorted(x) != list(range(self.n)):
            raise ValueError(f"not a permutation of {self.n} points: {x!r}")

    def order(self, x: Perm) -> int:
        seen = [False] * self.n
        result = 1
        for start in range(self.n):
            if seen[start]:
                continue
            length = 0
            p = start
            while not seen[p]:
                seen[p] = True
                p = x[p]
                length += 1
            result = math.lcm(result, length)
        return result

    def group_size(self) -> int:
        return math.factorial(self.n)

    def group_size_log2(self) -> float:
        return sum(math.log2(i) for i in range(2, self.n + 1))

    def elements(self):
        return itertools.permutations(range(self.n))


@dataclass(frozen=True)
class _MatrixContext(GroupContext):
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def _raw_multiply(self, x: Mat, y: Mat) -> Mat:
        p = self.p
        a, b, c, d = x
        e, f, g, h = y
        return ((a * e + b * g) % p, (a * f + b * h) % p,
                (c * e + d * g) % p, (c * f + d * h) % p)

    def identity(self) -> Mat:
        return (1, 0, 0, 1)

    def canonical_key(self, x: Mat) -> bytes:
        if self.p < 1 << 16:
            return struct.pack(">4H", *x)
        return struct.pack(">4I", *x)

    def group_size(self) -> int:
        return self.p * (self.p - 1) * (self.p + 1)

    def group_size_log2(self) -> float:
        return math.log2(self.group_size())


@dataclass(frozen=True)
class SL2Context(_MatrixContext):
    family = "sl2"
    algebraic_dim = 3

    def multiply(self, x: Mat, y: Mat) -> Mat:
        return self._raw_multiply(x, y)

    def invert(self, x: Mat) -> Mat:
        a, b, c, d = x
        p = self.p
        return (d % p, -b % p, -c % p, a % p)

    def sample_uniform(self, rng) -> Mat:
        # Uniform first row (a,b) != (0,0); the p completions (c,d) of
        # ad - bc = 1 are parametrized by one free residue.
        p = self.p
        while True:
            a, b = rng.randrange(p), rng.randrange(p)
            if a or b:
                break
        u = rng.randrange(p)
        if a:
            return (a, b, u, (1 + b * u) * pow(a, -1, p) % p)
        return (a, b, -pow(b, -1, p) % p, u)

    def validate(self, x) -> None:
        a, b, c, d = x
        p = self.p
        if not all(0 <= v < p for v in x):
            raise ValueError(f"entries out of range mod {p}: {x!r}")
        if (a * d - b * c) % p != 1:
            raise ValueError(f"determinant != 1 mod {p}: {x!r}")

    def elements(self):
        p = self.p
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    for d in range(p):
                        if (a * d - b * c) % p == 1:
                            yield (a, b, c, d)


@dataclass(frozen=True)
class PGL2Context(_MatrixContext):
    """PGL2(p) with one canonical matrix per projective class: every element
    is kept scaled so its first nonzero entry (row-major) is 1."""

    family = "pgl2"
    algebraic_dim = 3

    def canonicalize(self, x: Mat) -> Mat:
        p = self.p
        a, b, c, d = (v % p for v in x)
        pivot = a or b or c or d
        if pivot == 0:
            raise ValueError("zero matrix has no projective class")
        if pivot == 1:
            return (a, b, c, d)
        s = pow(pivot, -1, p)
        return (a * s % p, b * s % p, c * s % p, d * s % p)

    def multiply(self, x: Mat, y: Mat) -> Mat:
        return self.canonicalize(self._raw_multiply(x, y))

    def invert(self, x: Mat) -> Mat:
        a, b, c, d = x
        return self.canonicalize((d, -b, -c, a))

    def sample_uniform(self, rng) -> Mat:
        # Uniform over invertible matrices by rejection; the fibers of
        # GL2 -> PGL2 all have size p-1, so canonicalizing stays uniform.
        p = self.p
        while True:
            m = (rng.randrange(p), rng.randrange(p), rng.randrange(p), rng.randrange(p))
            if (m[0] * m[3] - m[1] * m[2]) % p != 0:
                return self.canonicalize(m)

    def validate(self, x) -> None:
        a, b, c, d = x
        p = self.p
        if not all(0 <= v < p for v in x):
            raise ValueError(f"entries out of range mod {p}: {x!r}")
        if (a * d - b * c) % p == 0:
            raise ValueError(f"singular matrix mod {p}: {x!r}")
        if self.canonicalize(x) != x:
            raise ValueError(f"matrix not in canonical projective form: {x!r}")

    def elements(self):
        p = self.p
        seen = set()
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    for d in range(p):
                        if (a * d - b * c) % p == 0:
                            continue
                        m = self.canonicalize((a, b, c, d))
                        if m not in seen:
                            seen.add(m)
                            yield m


@dataclass(frozen=True)
class WreathContext(GroupContext):
    """Automorphisms of the rooted binary tree of height n.

    An element is its portrait: one activity bit per internal node.  The
    image of a node address is computed by emitting bit XOR activity at each
    step while descending along the *original* child bit, so the section of
    x*y at child b is x_b * y_{b XOR eps_x(root)}.
    """

    height: int
    family = "w2"

    def __post_init__(self):
        if self.height < 0:
            raise ValueError("height must be >= 0")

    @property
    def nodes(self) -> int:
        return (1 << self.height) - 1

    def child(self) -> "WreathContext":
        return WreathContext(self.height - 1)

    def identity(self) -> bytes:
        return bytes(self.nodes)

    def _node_images(self, x: bytes) -> np.ndarray:
        """Heap-index image of every node (internal and leaf) under x."""
        n = self.height
        img = np.empty(1 << (n + 1), dtype=np.int64)
        img[1] = 1
        eps = np.frombuffer(x, dtype=np.uint8)
        for level in range(n):
            parents = np.arange(1 << level, 1 << (level + 1))
            base = 2 * img[parents]
            e = eps[parents - 1]
            img[2 * parents] = base + e
            img[2 * parents + 1] = base + (1 - e)
        return img

    def multiply(self, x: bytes, y: bytes) -> bytes:
        if len(x) != self.nodes or len(y) != self.nodes:
            raise ValueError("height mismatch")
        if self.height == 0:
            return b""
        img = self._node_images(x)
        ex = np.frombuffer(x, dtype=np.uint8)
        ey = np.frombuffer(y, dtype=np.uint8)
        return (ex ^ ey[img[1 : self.nodes + 1] - 1]).tobytes()

    def invert(self, x: bytes) -> bytes:
        if self.height == 0:
            return b""
        img = self._node_images(x)
        ex = np.frombuffer(x, dtype=np.uint8)
        out = np.empty(self.nodes, dtype=np.uint8)
        out[img[1 : self.nodes + 1] - 1] = ex
        return out.tobytes()

    def canonical_key(self, x: bytes) -> bytes:
        return np.packbits(np.frombuffer(x, dtype=np.uint8)).tobytes()

    def sample_uniform(self, rng) -> bytes:
        if self.height == 0:
            return b""
        raw = rng.getrandbits(self.nodes).to_bytes((self.nodes + 7) // 8, "little")
        arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return arr[: self.nodes].tobytes()

    def validate(self, x) -> None:
        if len(x) != self.nodes or any(v not in (0, 1) for v in x):
            raise ValueError(f"not a portrait of {self.nodes} bits")

    def root_bit(self, x: bytes) -> int:
        return x[0] if self.nodes else 0

    def sections(self, x: bytes) -> tuple[bytes, bytes]:
        """The two subtree automorphisms below the root (original children)."""
        if self.height < 1:
            raise ValueError("height-0 tree has no sections")
        parts0, parts1 = [], []
        for level in range(self.height - 1):
            width = 1 << level
            parts0.append(x[2 * width - 1 : 3 * width - 1])
            parts1.append(x[3 * width - 1 : 4 * width - 1])
        return b"".join(parts0), b"".join(parts1)

    def order(self, x: bytes) -> int:
        if self.height == 0:
            return 1
        sub = self.child()
        s0, s1 = self.sections(x)
        if x[0]:
            return 2 * sub.order(sub.multiply(s0, s1))
        return math.lcm(sub.order(s0), sub.order(s1))

    def to_permutation(self, x: bytes) -> Perm:
        """Injective homomorphism onto a permutation of the 2^n leaves."""
        n = self.height
        if n == 0:
            return (0,)
        img = self._node_images(x)
        leaves = img[1 << n :] - (1 << n)
        return tuple(int(v) for v in leaves)

    def group_size(self) -> int:
        return 1 << self.nodes

    def group_size_log2(self) -> float:
        return float(self.nodes)

    def elements(self):
        for bits in range(1 << self.nodes):
            yield bytes((bits >> i) & 1 for i in range(self.nodes))


_FAMILIES = {
    "sym": SymmetricContext,
    "sl2": SL2Context,
    "pgl2": PGL2Context,
    "w2": WreathContext,
}


def make_context(family: str, param: int) -> GroupContext:
    """Build a context from its family tag and single parameter (degree,
    prime modulus, or tree height)."""
    try:
        cls = _FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown group family {family!r}; expected one of {sorted(_FAMILIES)}")
    if family == "w2" and param < 1:
        raise ValueError("tree height must be >= 1")
    return cls(param)
