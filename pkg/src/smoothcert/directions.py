"""Orthogonal sign-vector families ("bad directions").

Vectors pointing at the corners of a cube are short in l_p (p > 2) but long
in l_2. A Sylvester doubling gives 2^n mutually orthogonal +-1 vectors; the
largest power of two b <= d of them, scaled and zero-padded to R^d, yields
b > d/2 orthogonal shifts of l_p norm eps and l_2 norm eps * b^(1/2 - 1/p).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .norms import INF, Order, as_array, inv_p, l2_exponent, parse_p

MAX_SIGN_ENTRIES = 1 << 26


class CapacityError(ValueError):
    """The requested sign matrix does not fit the memory budget."""


def hadamard_signs(n: int) -> np.ndarray:
    """2^n pairwise orthogonal vectors in {+-1}^(2^n), one per row (int8).

    Row ``i`` of the doubled matrix is (v_i, v_i) for i < 2^(n-1) and
    (v_i, -v_i) for the second half.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if 4**n > MAX_SIGN_ENTRIES:
        raise CapacityError(f"2^{n} x 2^{n} sign matrix exceeds {MAX_SIGN_ENTRIES} entries")
    h = np.ones((1, 1), dtype=np.int8)
    for _ in range(n):
        h = np.block([[h, h], [h, -h]])
    return h


def gram_int(signs: np.ndarray) -> np.ndarray:
    """Gram matrix in exact integer arithmetic."""
    s = signs.astype(np.int64)
    return s @ s.T


@dataclass(frozen=True)
class DirectionFamily:
    vectors: np.ndarray  # (b, d) float rows
    signs: np.ndarray  # (b, b) int8 sign block before scaling
    coords: np.ndarray  # which b coordinates of R^d carry the signs
    b: int
    d: int
    p: Order
    target_lp: float
    target_l2: float

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return self.b


def largest_power_of_two(d: int) -> int:
    d = int(d)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return 1 << (d.bit_length() - 1)


def bad_directions(d: int, p, eps: float = 1.0, permutation: Optional[np.ndarray] = None) -> DirectionFamily:
    """b > d/2 orthogonal vectors with l_p norm eps and l_2 norm eps * b^(1/2-1/p).

    The signs sit in the first b coordinates and the rest are zero. Pass a
    ``permutation`` of range(d) to place them elsewhere; coordinate j of the
    unpermuted vector moves to ``permutation[j]``.
    """
    p = parse_p(p)
    if p is not INF and p < 2:
        raise ValueError(f"bad directions need p >= 2, got {p}")
    eps = float(eps)
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    b = largest_power_of_two(d)
    signs = hadamard_signs(b.bit_length() - 1)
    scale = eps * b ** (-inv_p(p))
    if permutation is None:
        coords = np.arange(b)
        vectors = np.empty((b, d))
        np.multiply(signs, scale, out=vectors[:, :b])
        vectors[:, b:] = 0.0
    else:
        vectors = np.zeros((b, d))
        permutation = np.asarray(permutation)
        if sorted(permutation.tolist()) != list(range(d)):
            raise ValueError("permutation must be a permutation of range(d)")
        coords = permutation[:b]
        vectors[:, coords] = signs * scale
    vectors.setflags(write=False)
    return DirectionFamily(vectors, signs, coords, b, int(d), p, eps, eps * b ** l2_exponent(p))


def project_coefficients(family: DirectionFamily, x) -> np.ndarray:
    """Coefficients v_i.x / ||v_i||_2 of x on the orthonormalized family."""
    x = as_array(x)
    if x.size != family.d:
        raise ValueError(f"x has dimension {x.size}, family has {family.d}")
    return family.vectors @ x / family.target_l2
