import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kickanneal.exceptions import ConfigurationError, NormalizationError
from kickanneal.pauli import (
    SINGLE_QUBIT,
    PauliString,
    QubitRegister,
    StateVector,
    apply_pauli_string,
    basis_state,
    dense_matrix,
    expectation,
    partial_trace_ancilla,
    product_state,
)
from kickanneal.observables import ghz_state

from oracles import dense_partial_trace

SQ2 = 1 / np.sqrt(2)


def random_state(reg, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=reg.dim) + 1j * rng.normal(size=reg.dim)
    return StateVector(reg, v / np.linalg.norm(v))


@st.composite
def pauli_strings(draw, n):
    labels = draw(st.lists(st.sampled_from(["I", "X", "Y", "Z", "XY"]), min_size=n, max_size=n))
    coeff = draw(st.floats(-3, 3, allow_nan=False))
    return PauliString(coeff, {q: lab for q, lab in enumerate(labels)})


def test_register_layout():
    reg = QubitRegister(3, 2)
    assert reg.dim == 32
    assert list(reg.system_qubits()) == [0, 1, 2]
    assert list(reg.ancilla_qubits()) == [3, 4]


@pytest.mark.parametrize("ns,na", [(0, 1), (1, -1), (20, 5)])
def test_register_rejects_bad_sizes(ns, na):
    with pytest.raises(ConfigurationError):
        QubitRegister(ns, na)


def test_z_on_zero_is_plus():
    reg = QubitRegister(1)
    out = apply_pauli_string(basis_state(reg, 0), PauliString(1.0, {0: "Z"}))
    np.testing.assert_allclose(out.amplitudes, [1, 0])


def test_x_flips_bit():
    reg = QubitRegister(1)
    out = apply_pauli_string(basis_state(reg, 0), PauliString(1.0, {0: "X"}))
    np.testing.assert_allclose(out.amplitudes, [0, 1])


def test_xy_label_matches_dense_two_by_two():
    expected = np.array([[0, (1 - 1j) * SQ2], [(1 + 1j) * SQ2, 0]])
    np.testing.assert_allclose(SINGLE_QUBIT["XY"], expected, atol=1e-15)
    np.testing.assert_allclose(SINGLE_QUBIT["XY"], (SINGLE_QUBIT["X"] + SINGLE_QUBIT["Y"]) * SQ2, atol=1e-15)
    np.testing.assert_allclose(SINGLE_QUBIT["XY"] @ SINGLE_QUBIT["XY"], np.eye(2), atol=1e-15)
    reg = QubitRegister(1)
    out = apply_pauli_string(basis_state(reg, 0), PauliString(1.0, {0: "XY"}))
    np.testing.assert_allclose(out.amplitudes, [0, (1 + 1j) * SQ2], atol=1e-15)


def test_apply_leaves_input_untouched():
    reg = QubitRegister(2)
    s = random_state(reg, 1)
    before = s.amplitudes.copy()
    apply_pauli_string(s, PauliString(2.0, {0: "Y", 1: "X"}))
    np.testing.assert_array_equal(s.amplitudes, before)


def test_out_of_range_index_rejected():
    with pytest.raises(ConfigurationError):
        apply_pauli_string(basis_state(QubitRegister(2), 0), PauliString(1.0, {2: "X"}))


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), pauli_strings(n), st.integers(0, 2**31))))
def test_matrix_free_agrees_with_dense(case):
    n, p, seed = case
    reg = QubitRegister(n)
    s = random_state(reg, seed)
    out = apply_pauli_string(s, p).amplitudes
    np.testing.assert_allclose(out, dense_matrix([p], reg) @ s.amplitudes, atol=1e-12)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), pauli_strings(n))))
def test_dense_single_string_hermitian_and_squares(case):
    n, p = case
    m = dense_matrix([p], QubitRegister(n))
    np.testing.assert_allclose(m, m.conj().T, atol=1e-14)
    np.testing.assert_allclose(m @ m, p.coeff**2 * np.eye(2**n), atol=1e-12)


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(pauli_strings(n), pauli_strings(n), st.just(n))))
def test_commutes_with_matches_dense_commutator(case):
    a, b, n = case
    reg = QubitRegister(n)
    ma = dense_matrix([PauliString(1.0, a.factors)], reg)
    mb = dense_matrix([PauliString(1.0, b.factors)], reg)
    comm = np.abs(ma @ mb - mb @ ma).max()
    if a.commutes_with(b):
        assert comm < 1e-12
    else:
        # reported non-commuting: XY against X or Y never commutes either, so this is strict
        assert comm > 1e-12


def test_dense_empty_and_single_z():
    assert not dense_matrix([], QubitRegister(2)).any()
    np.testing.assert_array_equal(dense_matrix([PauliString(1.0, {0: "Z"})], 1), np.diag([1, -1]))


def test_dense_refuses_large_register():
    with pytest.raises(ConfigurationError):
        dense_matrix([], 11)


def test_expectation_examples():
    reg = QubitRegister(4)
    z_sum = [PauliString(1.0, {i: "Z"}) for i in range(4)]
    assert expectation(basis_state(reg, 0), z_sum) == 4.0
    hp = [PauliString(-1.0, {i: "X", i + 1: "X"}) for i in range(3)]
    assert expectation(basis_state(reg, 15), hp) == 0.0
    ghz = StateVector(reg, ghz_state(4))
    assert expectation(ghz, hp) == pytest.approx(-3.0, abs=1e-12)
    assert np.linalg.eigvalsh(dense_matrix(hp, reg))[0] == pytest.approx(-3.0, abs=1e-12)


def test_expectation_refuses_unnormalized():
    reg = QubitRegister(1)
    with pytest.raises(NormalizationError):
        expectation(StateVector(reg, np.array([1.0, 1.0])), [PauliString(1.0, {0: "Z"})])


def test_partial_trace_product_state_is_pure():
    reg = QubitRegister(2, 2)
    plus = np.array([1, 1]) * SQ2
    s = product_state(reg, [plus, np.array([0.6, 0.8]), np.array([1, 0]), np.array([1, 0])])
    rho = partial_trace_ancilla(s)
    rho.check()
    assert rho.purity == pytest.approx(1.0, abs=1e-12)
    psi_s = np.kron(np.array([0.6, 0.8]), plus)
    np.testing.assert_allclose(rho.entries, np.outer(psi_s, psi_s.conj()), atol=1e-12)


def test_partial_trace_bell_pair_is_maximally_mixed():
    reg = QubitRegister(1, 1)
    s = StateVector(reg, np.array([1, 0, 0, 1]) * SQ2)
    np.testing.assert_allclose(partial_trace_ancilla(s).entries, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_no_ancilla_is_projector():
    reg = QubitRegister(3)
    s = random_state(reg, 4)
    np.testing.assert_allclose(partial_trace_ancilla(s).entries, np.outer(s.amplitudes, s.amplitudes.conj()), atol=1e-14)


@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**31))
def test_partial_trace_matches_dense_and_energy_identity(ns, na, seed):
    reg = QubitRegister(ns, na)
    s = random_state(reg, seed)
    rho = partial_trace_ancilla(s)
    rho.check()
    np.testing.assert_allclose(rho.entries, dense_partial_trace(s.amplitudes, ns, na), atol=1e-12)
    rng = np.random.default_rng(seed)
    h = [PauliString(rng.normal(), {q: rng.choice(["X", "Y", "Z", "XY"])}) for q in range(ns)]
    h.append(PauliString(0.7, {0: "Z", ns - 1: "X"}) if ns > 1 else PauliString(0.7, {0: "X"}))
    tr = np.trace(rho.entries @ dense_matrix(h, ns)).real
    assert tr == pytest.approx(expectation(s, h), abs=1e-10)


def test_density_matrix_check_flags_violations():
    from kickanneal.pauli import DensityMatrix

    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1, 0.1], [0, 0]], dtype=complex)).check()
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2, dtype=complex)).check()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]).astype(complex)).check()
