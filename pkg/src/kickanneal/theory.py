"""Time-averaged-Hamiltonian predictions for kicked annealing.

Everything here works in the frame rotating with the one-local mixer
``theta_M(t) sum_i Z_i``, whose accumulated phase is
``Theta_M(t) = theta_M(0) tau (1 - exp(-t/tau))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from .exceptions import DomainError, QuadratureError
from .pauli import DensityMatrix, PauliString, QubitRegister, dense_matrix

QUAD_EPSABS = 1e-10


@dataclass(frozen=True)
class TheoryInputs:
    n_s: int
    n_a: int
    n_k: int
    theta: float
    theta_m0: float
    tau: float
    theta_xx0: float = 1.0
    e_target: float = -1.0
    epsilon: float = 0.05
    T: Optional[float] = None
    bonds: Optional[int] = None

    @property
    def eval_time(self) -> float:
        return self.tau if self.T is None else self.T

    @property
    def valid(self) -> bool:
        """Rotating-frame averaging needs ``theta_M(0) tau >~ 1``."""
        return self.theta_m0 * self.tau >= 1.0

    @property
    def kick_strength(self) -> float:
        return self.n_a * self.n_k * self.theta

    @property
    def connectivity(self) -> int:
        return self.n_s - 1 if self.bonds is None else self.bonds


def mixer_phase(t, theta_m0: float, tau: float):
    if tau <= 0:
        raise DomainError("tau must be > 0")
    return theta_m0 * tau * (1.0 - np.exp(-np.asarray(t, dtype=float) / tau))


def mixer_amplitude(t: float, theta_m0: float, tau: float) -> float:
    return theta_m0 * math.exp(-t / tau)


def _quad(f, a: float, b: float) -> float:
    # integrands are bounded; subdivide generously since Theta_M can wind many times
    n_osc = 1 + int(abs(b - a))
    value, err = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=0.0, limit=max(200, 50 * n_osc))
    if err > QUAD_EPSABS * 10:
        raise QuadratureError(f"quadrature error estimate {err:.2e} above tolerance")
    return value


def averaged_hxx_coefficients(T: float, theta_m0: float, tau: float) -> tuple[float, float]:
    """Time averages of ``cos^2(2 Theta_M)`` and ``sin^2(2 Theta_M)`` over ``[0, T]``."""
    if T <= 0:
        raise DomainError("T must be > 0")
    c_xx = _quad(lambda t: math.cos(2 * mixer_phase(t, theta_m0, tau)) ** 2, 0.0, T) / T
    c_yy = _quad(lambda t: math.sin(2 * mixer_phase(t, theta_m0, tau)) ** 2, 0.0, T) / T
    return c_xx, c_yy


def f_factor(T: float, theta_m0: float, tau: float) -> float:
    """Energy-flow factor; integrals run over dimensionless time ``t/tau``."""
    if T <= 0:
        raise DomainError("T must be > 0")
    end = T / tau
    phase0 = 2.0 * theta_m0 * tau

    def rot(u):
        return 2.0 * theta_m0 * tau * (1.0 - math.exp(-u))

    cos_int = _quad(lambda u: math.cos(rot(u)) ** 2, 0.0, end)
    sin_int = _quad(lambda u: math.sin(rot(u)) ** 2, 0.0, end)
    return math.sin(phase0) ** 2 * cos_int + math.cos(phase0) ** 2 * sin_int


def predicted_energies(inputs: TheoryInputs) -> tuple[float, float, float]:
    """``(e0, e2, e_system_flow)`` at ``inputs.eval_time``."""
    theta_m = mixer_amplitude(inputs.eval_time, inputs.theta_m0, inputs.tau)
    strength2 = inputs.kick_strength ** 2
    e0 = -inputs.n_s * theta_m
    e2 = strength2 * inputs.n_s * theta_m
    flow = -inputs.theta_xx0 * 0.5 * strength2 * inputs.connectivity * f_factor(
        inputs.eval_time, inputs.theta_m0, inputs.tau
    )
    return e0, e2, flow


def mixer_energy_closed_form(n_s: int, theta_m0: float, tau: float, t: Optional[float] = None) -> float:
    """``-N_S theta_M(t)``: mixer energy of the unkicked polarized state."""
    t = tau if t is None else t
    return -n_s * mixer_amplitude(t, theta_m0, tau)


def optimal_angle(e_target: float, e_mixer_tau: float, n_a: int, n_k: int) -> float:
    if n_a < 1 or n_k < 1:
        raise DomainError("need n_a >= 1 and n_k >= 1")
    if e_mixer_tau == 0:
        raise DomainError("mixer energy must be non-zero")
    ratio = e_target / e_mixer_tau
    # ratio == 1 is the no-kick boundary, only strictly shallower mixers are rejected
    if ratio > 1.0 + 1e-12:
        raise DomainError(
            f"E_target/E_mixer = {ratio:.4f} > 1: the mixer energy is shallower than the target"
        )
    if ratio < 0.0:
        raise DomainError(f"E_target/E_mixer = {ratio:.4f} < 0: energies must share a negative sign")
    return math.sqrt(max(0.0, 1.0 - ratio)) / (n_a * n_k)


def speedup_ratio(inputs: TheoryInputs) -> float:
    """Predicted ``T*(kicked) / T*(unkicked)``."""
    x = inputs.kick_strength ** 2
    if inputs.epsilon <= 0 or inputs.epsilon >= 1:
        raise DomainError("speedup_ratio needs 0 < epsilon < 1")
    if inputs.e_target >= 0:
        raise DomainError("speedup_ratio needs e_target < 0")
    if x >= 1.0:
        raise DomainError(f"speedup_ratio needs (theta N_A N_K)^2 < 1, got {x:.4f}")
    lever = -inputs.n_s * inputs.theta_m0 / ((1.0 - inputs.epsilon) * inputs.e_target)
    if lever <= 1.0:
        raise DomainError(
            f"speedup_ratio needs -N_S theta_M(0) / ((1-eps) E_target) >> 1, got {lever:.4f}"
        )
    return 1.0 + math.log1p(-x) / math.log(lever)


def predicted_fidelity_gain(inputs: TheoryInputs) -> float:
    s = math.sin(2.0 * inputs.theta_m0 * inputs.tau)
    pref = 2.0 ** (-inputs.n_s + 1) * inputs.n_s
    return pref * inputs.n_a * inputs.theta * inputs.n_k * s + pref * inputs.kick_strength ** 2 * s ** 2


def _kick_sums(register: QubitRegister) -> tuple[np.ndarray, np.ndarray]:
    xz, yz = [], []
    for i in register.system_qubits():
        for a in register.ancilla_qubits():
            xz.append(PauliString(1.0, {i: "X", a: "Z"}))
            yz.append(PauliString(1.0, {i: "Y", a: "Z"}))
    return dense_matrix(xz, register), dense_matrix(yz, register)


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def tfim_initial_density(register: QubitRegister) -> np.ndarray:
    psi = np.zeros(register.dim, dtype=complex)
    psi[(1 << register.n_system) - 1] = 1.0
    return np.outer(psi, psi.conj())


def _check_scale(register: QubitRegister):
    if register.n_system > 4 or register.n_ancilla > 2 or register.n_ancilla < 1:
        raise DomainError("perturbative density matrix is limited to N_S <= 4 and 1 <= N_A <= 2")


def averaged_kick_angles(inputs: TheoryInputs) -> tuple[float, float]:
    """Effective ``(cos, sin)`` angles ``N_K theta cos/sin(2 theta_M(0) tau)``."""
    phase = 2.0 * inputs.theta_m0 * inputs.tau
    return inputs.n_k * inputs.theta * math.cos(phase), inputs.n_k * inputs.theta * math.sin(phase)


def perturbative_density_matrix(inputs: TheoryInputs, register: QubitRegister) -> DensityMatrix:
    """Second-order expansion ``rho(0) + rho1 + rho2`` under the averaged kick.

    The commutators are evaluated numerically on dense matrices, term by
    term: first order ``i a_c [XZ, rho] - i a_s [YZ, rho]``, second order the
    four nested commutators with weights ``-a_c^2/2``, ``-a_s^2/2`` and
    ``+a_s a_c / 2`` (twice). The result is not renormalized.
    """
    _check_scale(register)
    xz, yz = _kick_sums(register)
    rho0 = tfim_initial_density(register)
    a_c, a_s = averaged_kick_angles(inputs)
    xz_r, yz_r = _comm(xz, rho0), _comm(yz, rho0)
    rho1 = -1j * a_s * yz_r + 1j * a_c * xz_r
    rho2 = (
        -0.5 * a_c**2 * _comm(xz, xz_r)
        - 0.5 * a_s**2 * _comm(yz, yz_r)
        + 0.5 * a_s * a_c * _comm(xz, yz_r)
        + 0.5 * a_s * a_c * _comm(yz, xz_r)
    )
    return DensityMatrix(rho0 + rho1 + rho2)


def averaged_kick_conjugation(inputs: TheoryInputs, register: QubitRegister) -> DensityMatrix:
    """Exact ``exp(iA) rho(0) exp(-iA)`` with ``A = a_c XZ - a_s YZ`` (dense)."""
    _check_scale(register)
    xz, yz = _kick_sums(register)
    a_c, a_s = averaged_kick_angles(inputs)
    u = expm(1j * (a_c * xz - a_s * yz))
    rho0 = tfim_initial_density(register)
    return DensityMatrix(u @ rho0 @ u.conj().T)


def averaged_hxx_matrix(inputs: TheoryInputs, register: QubitRegister, bonds) -> np.ndarray:
    """Dense ``-theta_XX (c_xx sum XX + c_yy sum YY)`` over ``bonds`` on the full register."""
    c_xx, c_yy = averaged_hxx_coefficients(inputs.eval_time, inputs.theta_m0, inputs.tau)
    terms = []
    for i, j in bonds:
        terms.append(PauliString(-inputs.theta_xx0 * c_xx, {i: "X", j: "X"}))
        terms.append(PauliString(-inputs.theta_xx0 * c_yy, {i: "Y", j: "Y"}))
    return dense_matrix(terms, register)


def theory_report(inputs: TheoryInputs, e_mixer_tau: Optional[float] = None) -> dict:
    """All predictions as a flat dict; domain failures are reported, not raised."""
    out: dict = {
        "valid": inputs.valid,
        "mixer_phase": float(mixer_phase(inputs.eval_time, inputs.theta_m0, inputs.tau)),
    }
    c_xx, c_yy = averaged_hxx_coefficients(inputs.eval_time, inputs.theta_m0, inputs.tau)
    out.update(c_xx=c_xx, c_yy=c_yy, f_factor=f_factor(inputs.eval_time, inputs.theta_m0, inputs.tau))
    e0, e2, flow = predicted_energies(inputs)
    out.update(e0=e0, e2=e2, e_system_flow=flow)
    if e_mixer_tau is None:
        e_mixer_tau = mixer_energy_closed_form(inputs.n_s, inputs.theta_m0, inputs.tau, inputs.eval_time)
    out["e_mixer_tau"] = e_mixer_tau
    for key, fn in (
        ("theta_opt", lambda: optimal_angle(inputs.e_target, e_mixer_tau, inputs.n_a, inputs.n_k)),
        ("speedup_ratio", lambda: speedup_ratio(inputs)),
    ):
        try:
            out[key] = fn()
        except DomainError as exc:
            out[key] = None
            out[f"{key}_error"] = str(exc)
    out["fidelity_gain"] = predicted_fidelity_gain(inputs)
    return out
