"""Reference implementations that share no code with the package."""

import math

import numpy as np


def expm_taylor(a, terms=30):
    """exp(a) by scaling and squaring with a truncated Taylor series."""
    a = np.asarray(a, dtype=complex)
    norm = np.max(np.sum(np.abs(a), axis=1))
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    b = a / 2**s
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def propagator(H, t):
    return expm_taylor(-1j * t * np.asarray(H))


def generator_oracle(h_of_g, g, t, delta=1e-6):
    """i dU/dg U^dagger with a 4th-order central difference of the Taylor propagator."""
    u = lambda x: propagator(h_of_g(x), t)
    du = (-u(g + 2 * delta) + 8 * u(g + delta) - 8 * u(g - delta) + u(g - 2 * delta)) / (12 * delta)
    return 1j * du @ u(g).conj().T


def spread_squared(h):
    w = np.linalg.eigvalsh(h)
    return float((w[-1] - w[0]) ** 2)


def spin_h(theta, B, t):
    """Closed-form generator of H = B(cos theta sx + sin theta sz)."""
    n = np.array([np.cos(theta), 0.0, np.sin(theta)])
    dn = np.array([-np.sin(theta), 0.0, np.cos(theta)])
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    dot = lambda v: v[0] * sx + v[1] * sy + v[2] * sz
    return np.sin(B * t) * np.cos(B * t) * dot(dn) + np.sin(B * t) ** 2 * dot(np.cross(n, dn))
