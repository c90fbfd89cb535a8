"""Closed-form solutions of the two worked examples.

Example 1 is the triangular system with ``A = 1 + 0.5/((alpha - i lam)(alpha + i lam))``,
``B = B_+``, ``C = 1`` and rational forcings. Its unknowns reduce to two
constants ``k1, k2`` fixed by removing the poles that ``1/K1`` would otherwise
put at the zeros ``+-i mu`` of ``K1``, ``mu = sqrt(lam**2 + 0.5)``.

Example 2 comes from a convolution integral equation on the half line with
kernel built from ``exp(-|x|)``; after pole removal it reduces to two
constants ``C1, C2`` coupled through ``b``.
"""
from __future__ import annotations

import cmath
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

Fn = Callable[[np.ndarray], np.ndarray]


# --------------------------------------------------------------------------
# Example 1


@dataclass(frozen=True)
class Example1Params:
    lam: complex
    L: float

    def __post_init__(self):
        if complex(self.lam).real <= 0:
            raise ValueError("Example 1 requires Re(lambda) > 0")
        if self.L <= 0:
            raise ValueError("L must be positive")


def f_minus(z):
    """Common minus forcing ``f3^- = f4^- = 1/(alpha - i)``."""
    return 1.0 / (z - 1j)


def f_plus(z):
    """Common plus forcing ``f3^+ = f4^+ = 1/(alpha + 2i)``."""
    return 1.0 / (z + 2j)


@dataclass(frozen=True)
class Example1Exact:
    params: Example1Params
    mu: complex
    # constants as printed with the example, kept for reference
    b: complex
    c: complex
    d: complex
    # constants of the pole-removal conditions at -i mu and i mu
    beta: complex
    r: complex
    c_hat: complex
    d_hat: complex
    k1: complex
    k2: complex

    def K1(self, z):
        lam = self.params.lam
        return 0.5 / ((z - 1j * lam) * (z + 1j * lam)) + 1.0

    def K1_plus_factor(self, z):
        return (z + 1j * self.mu) / (z + 1j * self.params.lam)

    def K1_minus_factor(self, z):
        return (z - 1j * self.mu) / (z - 1j * self.params.lam)

    def phiL(self, z, k1=None, k2=None):
        """Minus unknown ``Phi_-^(L)`` for given (default exact) constants."""
        k1 = self.k1 if k1 is None else k1
        k2 = self.k2 if k2 is None else k2
        lam, L = self.params.lam, self.params.L
        num = f_minus(z) + k2 / (z + 1j * lam) + np.exp(-1j * z * L) * (k1 / (z - 1j * lam) + f_minus(z))
        return num / self.K1(z)

    def psi0(self, z, k1=None, k2=None):
        """Plus unknown ``Psi_+^(0)``."""
        k1 = self.k1 if k1 is None else k1
        k2 = self.k2 if k2 is None else k2
        lam, L = self.params.lam, self.params.L
        num = f_plus(z) + k1 / (z - 1j * lam) + np.exp(1j * z * L) * (k2 / (z + 1j * lam) + f_plus(z))
        return num / self.K1(z)

    def phiL_iterate(self, z, n: int):
        """Closed form of the n-th iterate of ``Phi_-^(L)``."""
        k1s, k2s = zip(*example1_iterates(self.params, n))
        k1 = 0.0 if n == 0 else k1s[n - 1]
        num_extra = 1.0 if n > 0 else 0.0
        lam, L = self.params.lam, self.params.L
        num = f_minus(z) + k2s[n] / (z + 1j * lam) + num_extra * np.exp(-1j * z * L) * (
            k1 / (z - 1j * lam) + f_minus(z)
        )
        return num / self.K1(z)


def example1_exact(p: Example1Params) -> Example1Exact:
    lam, L = complex(p.lam), float(p.L)
    mu = cmath.sqrt(lam * lam + 0.5)
    if mu.real < 0:
        mu = -mu
    b = cmath.exp(-lam * L)
    c = 2j * lam * f_minus(-1j * lam)
    d = 2j * lam * f_plus(1j * lam)
    beta = cmath.exp(-mu * L)
    r = beta * (mu - lam) / (mu + lam)
    c_hat = (lam - mu) / (mu + 1)
    d_hat = (lam - mu) / (mu + 2)
    k1 = (1 + beta) * (d_hat - r * c_hat) / (1 - r * r)
    k2 = (1 + beta) * (c_hat - r * d_hat) / (1 - r * r)
    return Example1Exact(p, mu, b, c, d, beta, r, c_hat, d_hat, k1, k2)


def example1_iterates(p: Example1Params, n: int) -> list[tuple[complex, complex]]:
    """``(k1^(m), k2^(m))`` for ``m = 0..n``.

    ``k2^(0)`` comes from dropping the ``exp(-i alpha L)`` coupling altogether;
    thereafter ``k1^(m) = d(1 + beta) - r k2^(m)`` and
    ``k2^(m) = c(1 + beta) - r k1^(m-1)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    ex = example1_exact(p)
    one_b = 1 + ex.beta
    out = []
    k2 = ex.c_hat
    for m in range(n + 1):
        if m > 0:
            k2 = ex.c_hat * one_b - ex.r * out[-1][0]
        k1 = ex.d_hat * one_b - ex.r * k2
        out.append((k1, k2))
    return out


# --------------------------------------------------------------------------
# Example 2


@dataclass(frozen=True)
class Example2Params:
    lam: float
    L: float

    def __post_init__(self):
        if self.lam > 0.25:
            raise ValueError("Example 2 requires lambda <= 0.25")
        if self.L <= 0:
            raise ValueError("L must be positive")


@dataclass(frozen=True)
class Example2Exact:
    params: Example2Params
    lam0: float
    lam1: float
    b: float
    d1: complex
    d2: complex
    C1: complex
    C2: complex
    l2_residue: complex  # L2^+ = l2_residue / (alpha + i lam0)

    # factors
    def M_minus(self, z):
        return (z - 1j * self.lam1) / (z - 1j * self.lam0)

    def M_plus(self, z):
        return (z + 1j * self.lam0) / (z + 1j * self.lam1)

    def K_minus(self, z):
        return (z - 1j * self.lam0) / (z - 1j)

    def K_plus(self, z):
        return (z + 1j) / (z + 1j * self.lam0)

    # splittings, with the convention L^+ - L^- = L
    def L1(self, z):
        return (z - 1j) / ((z - 1j * self.lam0) * (z - 2j))

    def L1_plus(self, z):
        return np.zeros_like(np.asarray(z, dtype=complex))

    def L1_minus(self, z):
        return -self.L1(z)

    def L2(self, z):
        lam, L = self.params.lam, self.params.L
        return 2 * lam * np.exp(-1j * z * L) / ((z - 2j) * (z + 1j * self.lam0) * (z - 1j * self.lam1))

    def L2_plus(self, z):
        return self.l2_residue / (z + 1j * self.lam0)

    def L2_minus(self, z):
        return self.L2_plus(z) - self.L2(z)

    # coupling multipliers
    def R1(self, z):
        """Multiplier of ``exp(-i alpha L)`` in ``U_-^(2) / M_-``."""
        lam = self.params.lam
        return -2 * lam * self.K_minus(z) / ((z + 1j * self.lam0) * (z - 1j * self.lam1))

    def R2(self, z):
        """Multiplier of ``exp(i alpha L)`` in ``U_+^(1) / K_+``."""
        lam = self.params.lam
        return 2 * lam * self.M_plus(z) / ((z + 1j) * (z - 1j * self.lam0))

    def U1_plus(self, z, C1=None, C2=None):
        C1 = self.C1 if C1 is None else C1
        C2 = self.C2 if C2 is None else C2
        L = self.params.L
        inner = self.L2_plus(z) + C2 / (z + 1j * self.lam0)
        return self.K_plus(z) * (
            self.L1_plus(z) + C1 / (z - 1j * self.lam0) + self.R2(z) * np.exp(1j * z * L) * inner
        )

    def U2_minus(self, z, C1=None, C2=None):
        C1 = self.C1 if C1 is None else C1
        C2 = self.C2 if C2 is None else C2
        L = self.params.L
        inner = self.L1_minus(z) + C1 / (z - 1j * self.lam0)
        return self.M_minus(z) * (
            self.L2_minus(z) + C2 / (z + 1j * self.lam0) + self.R1(z) * np.exp(-1j * z * L) * inner
        )

    def U1_plus_iterate(self, z, n: int):
        it = example2_iterates(self.params, n)
        C2_prev = 0.0 if n == 0 else it[n - 1][1]
        return self.U1_plus(z, it[n][0], C2_prev)

    def U2_minus_iterate(self, z, n: int):
        C1, C2 = example2_iterates(self.params, n)[n]
        return self.U2_minus(z, C1, C2)


def example2_exact(p: Example2Params) -> Example2Exact:
    lam, L = float(p.lam), float(p.L)
    lam0 = math.sqrt(1 - 2 * lam)
    lam1 = math.sqrt(1 - 4 * lam)
    b = 2 * lam * math.exp(-lam0 * L) / ((lam0 + 1) * (lam0 + lam1))
    # residue of L2 at -i lam0 gives its plus part
    res = 2 * lam * math.exp(-lam0 * L) / ((-1j * lam0 - 2j) * (-1j * lam0 - 1j * lam1))
    l2p_at = res / (2j * lam0)
    l1m_at = -(-1j * lam0 - 1j) / ((-2j * lam0) * (-1j * lam0 - 2j))
    d1 = 2j * b * lam0 * l2p_at
    d2 = 2j * b * lam0 * l1m_at
    C1 = (d1 + d2 * b) / (b * b + 1)
    C2 = (d2 - d1 * b) / (b * b + 1)
    return Example2Exact(p, lam0, lam1, b, d1, d2, C1, C2, res)


def example2_iterates(p: Example2Params, n: int) -> list[tuple[complex, complex]]:
    """``(C1^(m), C2^(m))``: ``C1^(m) = d1 + b C2^(m-1)``, ``C2^(m) = d2 - b C1^(m)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    ex = example2_exact(p)
    out = []
    c2_prev = 0.0
    for _ in range(n + 1):
        c1 = ex.d1 + ex.b * c2_prev
        c2 = ex.d2 - ex.b * c1
        out.append((c1, c2))
        c2_prev = c2
    return out


def example2_b_squared(lam, L):
    """``b**2`` over arrays of parameters (for parameter scans)."""
    lam = np.asarray(lam, dtype=float)
    L = np.asarray(L, dtype=float)
    lam0 = np.sqrt(1 - 2 * lam)
    lam1 = np.sqrt(1 - 4 * lam)
    b = 2 * lam * np.exp(-lam0 * L) / ((lam0 + 1) * (lam0 + lam1))
    return b * b
