"""Dense complex linear algebra over labelled multipartite Hilbert spaces.

Operators are plain complex ndarrays; a :class:`SystemLayout` records the
ordered subsystem labels and dimensions that give the rows/columns their
tensor-product meaning.  Everything downstream (states, channels, charge
bookkeeping) builds on the four primitives here: Kronecker composition,
partial trace, Hermitian spectra, and PSD square roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .config import HERM_TOL, PSD_CLAMP_TOL, PSD_ERROR_TOL, check_dim_cap


@dataclass(frozen=True)
class SystemLayout:
    """Ordered list of (label, dim) subsystems of a tensor-product space."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(lab), int(d)) for lab, d in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        labels = [lab for lab, _ in subs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        if any(d <= 0 for _, d in subs):
            raise ValueError("subsystem dimensions must be positive")

    @classmethod
    def of(cls, *subsystems: tuple[str, int]) -> "SystemLayout":
        return cls(tuple(subsystems))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(reduce(lambda a, b: a * b, self.dims, 1))

    def dim(self, label: str) -> int:
        return dict(self.subsystems)[label]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def restrict(self, keep: Iterable[str]) -> "SystemLayout":
        """Sub-layout of the kept labels, in this layout's order."""
        keep = set(keep)
        unknown = keep - set(self.labels)
        if unknown:
            raise KeyError(f"unknown labels {sorted(unknown)}")
        return SystemLayout(tuple(s for s in self.subsystems if s[0] in keep))

    def extend(self, *extra: tuple[str, int]) -> "SystemLayout":
        return SystemLayout(self.subsystems + tuple(extra))

    def __mul__(self, other: "SystemLayout") -> "SystemLayout":
        return SystemLayout(self.subsystems + other.subsystems)


def as_complex(M) -> np.ndarray:
    return np.asarray(M, dtype=complex)


def op_norm(M: np.ndarray) -> float:
    """Spectral norm; cheap Frobenius shortcut when it already certifies."""
    M = np.atleast_2d(M)
    fro = float(np.linalg.norm(M))
    if fro == 0.0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def herm_defect(M: np.ndarray) -> float:
    return op_norm(M - M.conj().T)


def is_hermitian(M: np.ndarray, tol: float = HERM_TOL) -> bool:
    M = as_complex(M)
    if M.shape[0] != M.shape[1]:
        return False
    # Frobenius dominates the operator norm, so this is only conservative.
    return float(np.linalg.norm(M - M.conj().T)) <= tol or herm_defect(M) <= tol


def assert_hermitian(M: np.ndarray, name: str = "operator", tol: float = HERM_TOL) -> np.ndarray:
    M = as_complex(M)
    if not is_hermitian(M, tol):
        raise ValueError(f"{name} is not Hermitian within {tol}")
    return M


def is_unitary(U: np.ndarray, tol: float = HERM_TOL) -> bool:
    U = as_complex(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    d = U.shape[0]
    G = U.conj().T @ U - np.eye(d)
    return float(np.linalg.norm(G)) <= tol or op_norm(G) <= tol


def assert_unitary(U: np.ndarray, name: str = "U", tol: float = HERM_TOL) -> np.ndarray:
    U = as_complex(U)
    if not is_unitary(U, tol):
        raise ValueError(f"{name} is not unitary within {tol}")
    return U


def tensor_compose(factors: Sequence[tuple[np.ndarray, str]]) -> np.ndarray:
    """Kronecker product of labelled square factors, in the given order."""
    if not factors:
        raise ValueError("need at least one factor")
    mats = []
    for M, lab in factors:
        M = as_complex(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"factor on {lab!r} is not square: shape {M.shape}")
        mats.append(M)
    out = reduce(np.kron, mats)
    check_dim_cap(out.shape[0])
    return out


def embed_operator(op: np.ndarray, layout: SystemLayout, labels: Sequence[str]) -> np.ndarray:
    """Embed an operator acting on `labels` (contiguous in layout order is not
    required) into the full layout, identity elsewhere."""
    labels = list(labels)
    op = as_complex(op)
    dims = layout.dims
    n = len(dims)
    idx = [layout.index(lab) for lab in labels]
    dsub = int(np.prod([dims[i] for i in idx]))
    if op.shape != (dsub, dsub):
        raise ValueError(f"operator shape {op.shape} does not match labels {labels}")
    check_dim_cap(layout.total_dim)
    T = op.reshape([dims[i] for i in idx] + [dims[i] for i in idx])
    # einsum: delta on untouched axes
    row = list(range(n))
    col = list(range(n, 2 * n))
    op_axes = [row[i] for i in idx] + [col[i] for i in idx]
    operands = [T, op_axes]
    for i in range(n):
        if i not in idx:
            operands += [np.eye(dims[i]), [row[i], col[i]]]
    return np.einsum(*operands, row + col).reshape(layout.total_dim, layout.total_dim)


def partial_trace(op: np.ndarray, layout: SystemLayout, keep: Iterable[str]) -> np.ndarray:
    """Trace out every subsystem not in `keep`; result ordered by layout order."""
    op = as_complex(op)
    d = layout.total_dim
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match layout dim {d}")
    keep = set(keep)
    unknown = keep - set(layout.labels)
    if unknown:
        raise KeyError(f"unknown labels {sorted(unknown)}")
    dims = layout.dims
    n = len(dims)
    keep_idx = [i for i, lab in enumerate(layout.labels) if lab in keep]
    T = op.reshape(dims + dims)
    row = list(range(n))
    col = list(range(n, 2 * n))
    for i in range(n):
        if i not in keep_idx:
            col[i] = row[i]  # repeated index -> traced
    out_axes = [row[i] for i in keep_idx] + [col[i] for i in keep_idx]
    dkeep = int(np.prod([dims[i] for i in keep_idx])) if keep_idx else 1
    res = np.einsum(T, row + col, out_axes)
    return res.reshape(dkeep, dkeep)


def permute_subsystems(op: np.ndarray, layout: SystemLayout, new_order: Sequence[str]) -> np.ndarray:
    """Reorder the tensor factors of a square operator to `new_order`."""
    op = as_complex(op)
    dims = layout.dims
    n = len(dims)
    perm = [layout.index(lab) for lab in new_order]
    if sorted(perm) != list(range(n)):
        raise ValueError("new_order must be a permutation of the layout labels")
    T = op.reshape(dims + dims)
    T = np.transpose(T, perm + [n + p for p in perm])
    return T.reshape(layout.total_dim, layout.total_dim)


def hermitian_spectrum(H: np.ndarray, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of H.

    Degenerate clusters are re-ordered lexicographically and each column's
    phase is fixed (first significant entry real positive) so repeated calls
    on identical input are reproducible.
    """
    H = assert_hermitian(H, "H", tol)
    w, V = np.linalg.eigh(H)
    w, V = w[::-1].copy(), V[:, ::-1].copy()
    scale = max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    # canonical phases
    for j in range(V.shape[1]):
        col = V[:, j]
        k = int(np.argmax(np.abs(col) > 1e-8)) if np.any(np.abs(col) > 1e-8) else 0
        ph = col[k] / abs(col[k]) if abs(col[k]) > 0 else 1.0
        V[:, j] = col / ph
    # lexicographic order inside degenerate clusters
    i = 0
    while i < len(w):
        j = i
        while j + 1 < len(w) and abs(w[j + 1] - w[i]) <= 1e-10 * scale:
            j += 1
        if j > i:
            block = V[:, i : j + 1]
            keys = [tuple(np.round(block[:, c].view(float), 8)) for c in range(block.shape[1])]
            order = sorted(range(block.shape[1]), key=lambda c: keys[c])
            V[:, i : j + 1] = block[:, order]
        i = j + 1
    return w, V


def psd_sqrt(P: np.ndarray) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [PSD_ERROR_TOL, 0) are clamped to zero; materially negative
    ones (< PSD_ERROR_TOL) raise.
    """
    P = assert_hermitian(P, "P")
    w, V = np.linalg.eigh(P)
    if np.any(w < PSD_ERROR_TOL):
        raise ValueError(f"matrix is not PSD: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def min_eigval(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(assert_hermitian(H)).min())


def is_psd(M: np.ndarray, tol: float = PSD_CLAMP_TOL) -> bool:
    return is_hermitian(M) and float(np.linalg.eigvalsh((M + M.conj().T) / 2).min()) >= -tol
