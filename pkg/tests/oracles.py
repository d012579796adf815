"""Independent dense references used only by the tests."""
import math

import numpy as np
from scipy.linalg import expm

from kickanneal.pauli import dense_matrix


def dense_hamiltonian(h):
    mats = [dense_matrix([p], h.register) for _, p in h.terms]
    scheds = [s for s, _ in h.terms]

    def at(t):
        out = np.zeros_like(mats[0]) if mats else None
        for s, m in zip(scheds, mats):
            out = out + s.value(t) * m
        return out

    return at


def magnus4_evolve(h, psi, t_end, n_steps, extra=None):
    """Fourth-order Magnus integrator with two Gauss points per step."""
    H = dense_hamiltonian(h)
    step = t_end / n_steps
    c = math.sqrt(3) / 6
    psi = np.asarray(psi, dtype=complex)
    for k in range(n_steps):
        t = k * step
        h1 = H(t + step * (0.5 - c))
        h2 = H(t + step * (0.5 + c))
        if extra is not None:
            h1 = h1 + extra
            h2 = h2 + extra
        omega = -0.5j * step * (h1 + h2) - math.sqrt(3) / 12 * step**2 * (h2 @ h1 - h1 @ h2)
        psi = expm(omega) @ psi
    return psi


def midpoint_evolve(h, psi, t_end, n_steps):
    H = dense_hamiltonian(h)
    step = t_end / n_steps
    for k in range(n_steps):
        psi = expm(-1j * step * H((k + 0.5) * step)) @ psi
    return psi


def infidelity(a, b):
    # round-off can push the overlap slightly above 1
    return max(0.0, 1.0 - abs(np.vdot(a, b)) ** 2)


def dense_partial_trace(psi, n_system, n_ancilla):
    """Trace out the high (ancilla) qubits through an explicit 4-index tensor."""
    rho = np.outer(psi, psi.conj())
    ds, da = 2**n_system, 2**n_ancilla
    # index = s + ds * a, so reshape to (a, s, a', s')
    t = rho.reshape(da, ds, da, ds)
    return np.einsum("asat->st", t)


def riemann_mean(f, T, n=10**6):
    t = (np.arange(n) + 0.5) * (T / n)
    return float(np.mean(f(t)))


def riemann_integral(f, a, b, n=10**6):
    h = (b - a) / n
    t = a + (np.arange(n) + 0.5) * h
    return float(np.sum(f(t)) * h)
