import numpy as np
import pytest

from symrec.tensor import (
    SystemLayout,
    embed_operator,
    hermitian_spectrum,
    partial_trace,
    permute_subsystems,
    psd_sqrt,
    tensor_compose,
)

rng = np.random.default_rng(42)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def rand_herm(d, r=rng):
    A = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
    return (A + A.conj().T) / 2


def rand_psd(d, r=rng):
    A = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
    return A @ A.conj().T


def test_tensor_compose_identity():
    assert np.allclose(tensor_compose([(I2, "A"), (I2, "B")]), np.eye(4))


def test_tensor_compose_embedding():
    out = tensor_compose([(np.diag([0.0, 1.0]), "A"), (I2, "B")])
    assert np.allclose(out, np.diag([0.0, 0.0, 1.0, 1.0]))


def test_tensor_compose_pauli_flip():
    # oracle: direct 4x4 multiplication of the composed operator on |00>
    XX = tensor_compose([(X, "A"), (X, "B")])
    v00 = np.zeros(4)
    v00[0] = 1.0
    expected = np.zeros(4)
    expected[3] = 1.0  # |11>
    assert np.allclose(XX @ v00, expected)


def test_tensor_compose_rejects_nonsquare():
    with pytest.raises(ValueError):
        tensor_compose([(np.ones((2, 3)), "A")])


def test_tensor_compose_associative_up_to_permutation():
    A, B, C = rand_herm(2), rand_herm(3), rand_herm(2)
    lay = SystemLayout.of(("A", 2), ("B", 3), ("C", 2))
    abc = tensor_compose([(A, "A"), (B, "B"), (C, "C")])
    cab = tensor_compose([(C, "C"), (A, "A"), (B, "B")])
    lay_cab = SystemLayout.of(("C", 2), ("A", 2), ("B", 3))
    assert np.allclose(permute_subsystems(cab, lay_cab, ["A", "B", "C"]), abc)


def _partial_trace_oracle(op, dims, keep_idx):
    """Element-wise summation oracle, independent of the einsum path."""
    n = len(dims)
    T = op.reshape(dims + dims)
    keep_dims = [dims[i] for i in keep_idx]
    dk = int(np.prod(keep_dims))
    out = np.zeros((dk, dk), dtype=complex)
    import itertools

    traced = [i for i in range(n) if i not in keep_idx]
    for row in itertools.product(*[range(d) for d in keep_dims]):
        for col in itertools.product(*[range(d) for d in keep_dims]):
            acc = 0.0
            for tr in itertools.product(*[range(dims[i]) for i in traced]):
                idx_r = [0] * n
                idx_c = [0] * n
                for pos, i in enumerate(keep_idx):
                    idx_r[i] = row[pos]
                    idx_c[i] = col[pos]
                for pos, i in enumerate(traced):
                    idx_r[i] = tr[pos]
                    idx_c[i] = tr[pos]
                acc += T[tuple(idx_r) + tuple(idx_c)]
            r = np.ravel_multi_index(row, keep_dims) if keep_idx else 0
            c = np.ravel_multi_index(col, keep_dims) if keep_idx else 0
            out[r, c] = acc
    return out


def test_partial_trace_bell():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    lay = SystemLayout.of(("A", 2), ("B", 2))
    red = partial_trace(np.outer(bell, bell), lay, ["A"])
    assert np.allclose(red, np.eye(2) / 2)


def test_partial_trace_product():
    rho = rand_psd(2)
    rho /= np.trace(rho)
    sig = rand_psd(3)
    sig /= np.trace(sig)
    lay = SystemLayout.of(("A", 2), ("B", 3))
    assert np.allclose(partial_trace(np.kron(rho, sig), lay, ["A"]), rho, atol=1e-12)


def test_partial_trace_random_vs_oracle():
    op = rand_psd(4)
    lay = SystemLayout.of(("A", 2), ("B", 2))
    got = partial_trace(op, lay, ["B"])
    want = _partial_trace_oracle(op, (2, 2), [1])
    assert np.allclose(got, want, atol=1e-12)
    assert abs(np.trace(got) - np.trace(op)) <= 1e-12 * abs(np.trace(op))


def test_partial_trace_composes():
    op = rand_psd(8)
    lay = SystemLayout.of(("A", 2), ("B", 2), ("C", 2))
    two_step = partial_trace(
        partial_trace(op, lay, ["A", "B"]), SystemLayout.of(("A", 2), ("B", 2)), ["A"]
    )
    one_step = partial_trace(op, lay, ["A"])
    assert np.allclose(two_step, one_step, atol=1e-12)


def test_partial_trace_unknown_label():
    with pytest.raises(KeyError):
        partial_trace(np.eye(4), SystemLayout.of(("A", 2), ("B", 2)), ["Q"])


def test_embed_operator_matches_kron():
    A = rand_herm(2)
    lay = SystemLayout.of(("A", 2), ("B", 3))
    assert np.allclose(embed_operator(A, lay, ["A"]), np.kron(A, np.eye(3)))
    B = rand_herm(3)
    assert np.allclose(embed_operator(B, lay, ["B"]), np.kron(np.eye(2), B))


def test_hermitian_spectrum_diag():
    w, V = hermitian_spectrum(np.diag([3.0, 1.0]))
    assert np.allclose(w, [3.0, 1.0])


def test_hermitian_spectrum_pauli_x():
    w, V = hermitian_spectrum(X)
    assert np.allclose(w, [1.0, -1.0])
    plus = np.array([1, 1]) / np.sqrt(2)
    assert min(np.linalg.norm(V[:, 0] - plus), np.linalg.norm(V[:, 0] + plus)) < 1e-10


def test_hermitian_spectrum_reconstruction():
    H = rand_herm(8)
    w, V = hermitian_spectrum(H)
    assert np.all(np.diff(w) <= 1e-12)
    recon = (V * w) @ V.conj().T
    assert np.linalg.norm(recon - H, 2) <= 1e-9 * np.linalg.norm(H, 2)
    assert np.linalg.norm(V.conj().T @ V - np.eye(8), 2) <= 1e-10


def test_hermitian_spectrum_relabel_invariance():
    H = rand_herm(4)
    lay = SystemLayout.of(("A", 2), ("B", 2))
    swapped = permute_subsystems(H, lay, ["B", "A"])
    w1, _ = hermitian_spectrum(H)
    w2, _ = hermitian_spectrum(swapped)
    assert np.allclose(w1, w2, atol=1e-10)


def test_hermitian_spectrum_rejects_nonhermitian():
    with pytest.raises(ValueError):
        hermitian_spectrum(np.array([[0, 1], [0, 0]], dtype=complex))


def test_psd_sqrt_examples():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_psd_sqrt_wishart_residual():
    P = rand_psd(4)
    S = psd_sqrt(P)
    assert np.linalg.norm(S @ S - P, 2) <= 1e-9 * np.linalg.norm(P, 2)
    assert np.linalg.eigvalsh(S).min() >= -1e-12


def test_psd_sqrt_clamps_tiny_negative():
    P = np.diag([1.0, -5e-11])
    S = psd_sqrt(P)
    assert np.allclose(S, np.diag([1.0, 0.0]))


def test_psd_sqrt_rejects_negative():
    with pytest.raises(ValueError):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_dim_cap(monkeypatch):
    monkeypatch.setenv("SYMREC_DIM_CAP", "8")
    with pytest.raises(ValueError):
        tensor_compose([(np.eye(4), "A"), (np.eye(4), "B")])
    monkeypatch.setenv("SYMREC_DIM_CAP", "16")
    tensor_compose([(np.eye(4), "A"), (np.eye(4), "B")])


def test_layout_validation():
    with pytest.raises(ValueError):
        SystemLayout.of(("A", 2), ("A", 3))
    lay = SystemLayout.of(("A", 2), ("B", 3))
    assert lay.total_dim == 6
    assert lay.dim("B") == 3
    assert lay.restrict(["B"]).labels == ("B",)
