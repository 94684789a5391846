import numpy as np
import pytest

from nashstates.errors import (
    DimensionMismatchError,
    InvariantViolationError,
    NotHermitianError,
)
from nashstates.operators import (
    DenseOperator,
    DensityMatrix,
    HermitianTag,
    InteractionGraph,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PauliTerm,
    StateVector,
    commutator,
    diagonalize,
    embed,
    expectation,
    ket,
    maximally_mixed,
    random_hermitian,
    random_state,
    star_hamiltonians,
)


def test_embed_identity_on_single_qubit():
    assert np.allclose(embed(PAULI_Z, [0], 1).entries, PAULI_Z.entries)


def test_embed_second_qubit_of_two():
    assert np.allclose(embed(PAULI_Z, [1], 2).entries, np.diag([1, -1, 1, -1]))


def test_embed_two_site_matches_product_oracle():
    zz = DenseOperator.from_matrix(np.kron(PAULI_Z.entries, PAULI_Z.entries))
    lhs = embed(zz, [0, 1], 3).entries
    rhs = embed(PAULI_Z, [0], 3).entries @ embed(PAULI_Z, [1], 3).entries
    assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_embed_is_multiplicative(rng):
    for n in (2, 3, 4):
        for size in (1, 2):
            sites = list(rng.choice(n, size=size, replace=False))
            a = random_hermitian(2**size, int(rng.integers(2**31)))
            b = random_hermitian(2**size, int(rng.integers(2**31)))
            ab = DenseOperator.from_matrix(a.entries @ b.entries)
            lhs = embed(ab, sites, n).entries
            rhs = embed(a, sites, n).entries @ embed(b, sites, n).entries
            assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_embed_error_cases():
    with pytest.raises(DimensionMismatchError):
        embed(PAULI_Z, [0, 1], 3)
    with pytest.raises(InvariantViolationError):
        embed(PAULI_Z, [5], 2)
    with pytest.raises(InvariantViolationError):
        zz = DenseOperator.from_matrix(np.kron(PAULI_Z.entries, PAULI_Z.entries))
        embed(zz, [1, 1], 3)


def test_commutator_pauli_algebra():
    assert np.max(np.abs(commutator(PAULI_X, PAULI_X).entries)) == 0
    c = commutator(PAULI_X, PAULI_Y)
    assert np.allclose(c.entries, 2j * PAULI_Z.entries)
    assert c.tag is HermitianTag.ANTI_HERMITIAN


def test_commutator_matches_arithmetic_oracle(rng):
    a = random_hermitian(4, 11)
    b = random_hermitian(4, 12)
    want = a.entries @ b.entries - b.entries @ a.entries
    assert np.max(np.abs(commutator(a, b).entries - want)) < 1e-14
    with pytest.raises(DimensionMismatchError):
        commutator(a, PAULI_X)


def test_expectation_basics():
    assert abs(expectation(ket("0"), PAULI_Z, real=True) - 1.0) < 1e-14
    traceless = random_hermitian(4, 5)
    traceless = traceless - DenseOperator.from_matrix(
        np.eye(4) * np.trace(traceless.entries) / 4)
    assert abs(expectation(maximally_mixed(4), traceless)) < 1e-14


def test_expectation_matches_quadratic_form_oracle():
    state = random_state(8, 3)
    op = random_hermitian(8, 4)
    direct = np.einsum("i,ij,j->", state.amplitudes.conj(), op.entries,
                       state.amplitudes)
    assert abs(expectation(state, op) - direct) < 1e-13


def test_commutator_expectation_reality(rng):
    # <[h, A]> purely imaginary for Hermitian A, purely real for anti-Hermitian
    h = random_hermitian(4, 21)
    a = random_hermitian(4, 22)
    state = random_state(4, 23)
    val = expectation(state, commutator(h, a))
    assert abs(val.real) < 1e-12
    val_anti = expectation(state, commutator(h, 1j * a))
    assert abs(val_anti.imag) < 1e-12


def _two_site(seed):
    return random_hermitian(4, seed)


def test_star_single_edge():
    h01 = _two_site(7)
    graph = InteractionGraph(2, {(0, 1): h01})
    terms = star_hamiltonians(graph)
    want = 0.5 * embed(h01, [0, 1], 2).entries
    assert np.max(np.abs(terms[0].entries - want)) < 1e-14
    assert np.max(np.abs(terms[1].entries - want)) < 1e-14


def test_star_tfim_ring_closed_form():
    n, g = 5, 1.3
    zz = DenseOperator.from_matrix(-np.kron(PAULI_Z.entries, PAULI_Z.entries))
    edges = {(i, (i + 1) % n): zz for i in range(n)}
    edges = {tuple(sorted(k)): v for k, v in edges.items()}
    onsite = {i: DenseOperator.from_matrix(-g * PAULI_X.entries) for i in range(n)}
    terms = star_hamiltonians(InteractionGraph(n, edges, onsite), onsite_weight=1.0)
    for i in range(n):
        want = (-0.5 * embed(PAULI_Z, [i], n).entries
                @ (embed(PAULI_Z, [(i - 1) % n], n).entries
                   + embed(PAULI_Z, [(i + 1) % n], n).entries)
                - g * embed(PAULI_X, [i], n).entries)
        assert np.max(np.abs(terms[i].entries - want)) < 1e-12


def test_star_sum_reconstructs_hamiltonian(rng):
    n = 4
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            edges[(i, j)] = _two_site(int(rng.integers(2**31)))
    onsite = {i: random_hermitian(2, int(rng.integers(2**31))) for i in range(n)}
    graph = InteractionGraph(n, edges, onsite)
    full = sum(embed(op, list(pair), n).entries for pair, op in edges.items())
    one_local = sum(embed(op, [i], n).entries for i, op in onsite.items())

    terms = star_hamiltonians(graph, onsite_weight=1.0)
    total = sum(t.entries for t in terms)
    assert np.max(np.abs(total - (full + one_local))) < 1e-12

    half = star_hamiltonians(graph, onsite_weight=0.5)
    total_half = sum(t.entries for t in half)
    assert np.max(np.abs(total_half - (full + 0.5 * one_local))) < 1e-12


def test_diagonalize_paulis():
    vals, vecs = diagonalize(PAULI_Z)
    assert np.allclose(vals, [-1, 1])
    assert abs(abs(vecs[0].amplitudes[1]) - 1) < 1e-12  # |1> first
    assert abs(abs(vecs[1].amplitudes[0]) - 1) < 1e-12
    vals_x, _ = diagonalize(PAULI_X)
    assert np.allclose(vals_x, [-1, 1])


def test_diagonalize_quality(rng):
    op = random_hermitian(16, 99)
    vals, vecs = diagonalize(op)
    assert np.all(np.diff(vals) >= 0)
    mat = np.array([v.amplitudes for v in vecs]).T
    assert np.max(np.abs(mat.conj().T @ mat - np.eye(16))) < 1e-10
    scale = np.linalg.norm(op.entries, np.inf)
    for lam, v in zip(vals, vecs):
        assert np.linalg.norm(op.entries @ v.amplitudes - lam * v.amplitudes) < 1e-9 * scale


def test_diagonalize_against_charpoly_roots():
    for seed in (1, 2, 3):
        op = random_hermitian(4, seed)
        vals, _ = diagonalize(op)
        roots = np.sort(np.roots(np.poly(op.entries)).real)
        assert np.max(np.abs(vals - roots)) < 1e-9


def test_diagonalize_matches_free_fermion_ground_energy():
    from nashstates.tfim import TFIMSpec, ground_energy, hamiltonian
    spec = TFIMSpec(4, 1.0, 0.0)
    vals, _ = diagonalize(hamiltonian(spec))
    assert abs(vals[0] - ground_energy(spec)) < 1e-10


def test_diagonalize_rejects_non_hermitian():
    op = DenseOperator.from_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(NotHermitianError):
        diagonalize(op)


def test_random_hermitian_determinism_and_symmetry():
    a = random_hermitian(6, 42)
    b = random_hermitian(6, 42)
    assert np.array_equal(a.entries, b.entries)
    r = random_hermitian(6, 42, real_symmetric=True)
    assert np.array_equal(r.entries, r.entries.T)
    assert np.max(np.abs(r.entries.imag)) == 0


def test_random_hermitian_entry_variance_monte_carlo():
    n_samples = 10_000
    off = np.empty(n_samples, dtype=complex)
    diag = np.empty(n_samples)
    off_r = np.empty(n_samples)
    diag_r = np.empty(n_samples)
    for s in range(n_samples):
        m = random_hermitian(2, s).entries
        off[s] = m[0, 1]
        diag[s] = m[0, 0].real
        mr = random_hermitian(2, s, real_symmetric=True).entries
        off_r[s] = mr[0, 1].real
        diag_r[s] = mr[0, 0].real
    assert abs(np.mean(np.abs(off) ** 2) - 1.0) < 0.05
    assert abs(np.var(diag) - 1.0) < 0.05
    assert abs(np.var(off_r) - 1.0) < 0.05
    assert abs(np.var(diag_r) - 2.0) < 0.10


def test_random_state_haar_moment():
    probs = np.array([np.abs(random_state(4, s).amplitudes[0]) ** 2
                      for s in range(10_000)])
    assert abs(np.mean(probs) - 0.25) < 0.01
    st = random_state(4, 7)
    assert abs(np.linalg.norm(st.amplitudes) - 1) < 1e-12
    assert np.array_equal(st.amplitudes, random_state(4, 7).amplitudes)


def test_pauli_term_matches_kron_oracle():
    term = PauliTerm(0.75, {0: "X", 2: "Z"})
    got = term.to_operator(3).entries
    want = 0.75 * np.kron(PAULI_X.entries, np.kron(np.eye(2), PAULI_Z.entries))
    assert np.max(np.abs(got - want)) < 1e-14
    with pytest.raises(InvariantViolationError):
        PauliTerm(1.0, {0: "Q"})


def test_interaction_graph_validation():
    h = _two_site(1)
    with pytest.raises(InvariantViolationError):
        InteractionGraph(3, {(1, 1): h})
    with pytest.raises(InvariantViolationError):
        InteractionGraph(2, {(0, 5): h})
    skew = DenseOperator.from_matrix(1j * (np.eye(4) - np.ones((4, 4))) / 2)
    with pytest.raises(NotHermitianError):
        InteractionGraph(2, {(0, 1): skew})


def test_interaction_graph_reversed_edge_is_reordered():
    h = _two_site(9)
    g1 = InteractionGraph(2, {(0, 1): h})
    swapped = h.entries.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    g2 = InteractionGraph(2, {(1, 0): DenseOperator.from_matrix(swapped)})
    t1 = star_hamiltonians(g1)
    t2 = star_hamiltonians(g2)
    assert np.max(np.abs(t1[0].entries - t2[0].entries)) < 1e-14


def test_type_invariants():
    with pytest.raises(InvariantViolationError):
        StateVector(np.array([1.0, 1.0]))
    with pytest.raises(InvariantViolationError):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(InvariantViolationError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(NotHermitianError):
        DenseOperator(np.array([[0, 1], [0, 0]], dtype=complex), HermitianTag.HERMITIAN)
    op = random_hermitian(2, 0)
    with pytest.raises(ValueError):
        op.entries[0, 0] = 5.0  # frozen after construction
