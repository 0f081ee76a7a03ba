"""States, distances, purifications, moments, and quantum Fisher information.

The quantum Fisher information is evaluated through the closed-form eigenbasis
sum F = 2 Σ_{i,i'} (r_i - r_{i'})² / (r_i + r_{i'}) |X_{ii'}|², which agrees
with the limit definition 4 lim_{ε→0} D_F(e^{-iXε} ρ e^{iXε}, ρ)²/ε² (kept in
the tests as a finite-difference oracle).  Eigenvalue pairs whose sum falls
below the rank cutoff are skipped; the QFI is discontinuous at rank changes,
so that cutoff is part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import HERM_TOL, NORM_TOL, RANK_CUTOFF, TRACE_TOL
from .tensor import (
    SystemLayout,
    as_complex,
    assert_hermitian,
    hermitian_spectrum,
    partial_trace,
    psd_sqrt,
)


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace PSD Hermitian operator tagged with a layout."""

    matrix: np.ndarray
    layout: SystemLayout

    def __post_init__(self):
        M = as_complex(self.matrix)
        object.__setattr__(self, "matrix", M)
        d = self.layout.total_dim
        if M.shape != (d, d):
            raise ValueError(f"matrix shape {M.shape} does not match layout dim {d}")
        assert_hermitian(M, "density matrix")
        if abs(np.trace(M).real - 1.0) > TRACE_TOL or abs(np.trace(M).imag) > TRACE_TOL:
            raise ValueError(f"trace {np.trace(M)} is not 1 within {TRACE_TOL}")
        if float(np.linalg.eigvalsh((M + M.conj().T) / 2).min()) < -HERM_TOL:
            raise ValueError("density matrix is not PSD within tolerance")

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @classmethod
    def maximally_mixed(cls, layout: SystemLayout) -> "DensityMatrix":
        d = layout.total_dim
        return cls(np.eye(d) / d, layout)

    def partial_trace(self, keep) -> "DensityMatrix":
        red = partial_trace(self.matrix, self.layout, keep)
        return DensityMatrix(red, self.layout.restrict(keep))

    def expect(self, X: np.ndarray) -> float:
        return float(np.trace(self.matrix @ X).real)

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return hermitian_spectrum(self.matrix)


@dataclass(frozen=True)
class PureState:
    """Unit vector tagged with a layout."""

    amplitudes: np.ndarray
    layout: SystemLayout

    def __post_init__(self):
        v = as_complex(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", v)
        if v.shape[0] != self.layout.total_dim:
            raise ValueError(
                f"vector length {v.shape[0]} does not match layout dim {self.layout.total_dim}"
            )
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {np.linalg.norm(v)} is not 1 within {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def to_density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.layout)

    def partial_trace(self, keep) -> DensityMatrix:
        """Reduced state on `keep`, computed without forming the full matrix."""
        dims = self.layout.dims
        n = len(dims)
        keep = set(keep)
        keep_idx = [i for i, lab in enumerate(self.layout.labels) if lab in keep]
        rest_idx = [i for i in range(n) if i not in keep_idx]
        T = self.amplitudes.reshape(dims)
        T = np.transpose(T, keep_idx + rest_idx)
        dk = int(np.prod([dims[i] for i in keep_idx])) if keep_idx else 1
        A = T.reshape(dk, -1)
        return DensityMatrix(A @ A.conj().T, self.layout.restrict(keep))


def _mat(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else as_complex(rho)


def _check_same_layout(rho, sigma):
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity F(ρ,σ) = Tr√(√σ ρ √σ) = ‖√ρ √σ‖₁."""
    _check_same_layout(rho, sigma)
    a, b = _mat(rho), _mat(sigma)
    sa, sb = psd_sqrt(a), psd_sqrt(b)
    f = float(np.linalg.svd(sa @ sb, compute_uv=False).sum())
    return float(np.clip(f, 0.0, 1.0))


def purified_distance(rho, sigma) -> float:
    """D_F(ρ,σ) = √(1 − F(ρ,σ)²)."""
    f = fidelity(rho, sigma)
    return float(np.sqrt(max(0.0, 1.0 - f * f)))


def fidelity_with_pure(vec: np.ndarray, rho) -> float:
    """F(|ψ⟩, ρ) = √(⟨ψ|ρ|ψ⟩); cheap path when one argument is pure."""
    v = as_complex(vec).reshape(-1)
    ov = float(np.real(v.conj() @ _mat(rho) @ v))
    return float(np.clip(np.sqrt(max(ov, 0.0)), 0.0, 1.0))


def purify(rho: DensityMatrix, ref_label: str = "ref") -> PureState:
    """Purification with reference dimension equal to rank(ρ)."""
    w, V = np.linalg.eigh(rho.matrix)
    keep = w > RANK_CUTOFF
    w, V = w[keep], V[:, keep]
    r = len(w)
    d = rho.dim
    amps = (V * np.sqrt(w)).reshape(d * r)  # Σ_l √r_l |l⟩|l_ref⟩ in (sys, ref) order
    layout = rho.layout.extend((ref_label, r))
    return PureState(amps, layout)


def moments(rho, X: np.ndarray) -> tuple[float, float, float]:
    """(mean, variance, mean deviation ⟨|X − ⟨X⟩|⟩) of X in ρ.

    The mean deviation is exact, via the spectral decomposition of X.
    """
    m = _mat(rho)
    X = assert_hermitian(X, "X")
    if m.shape != X.shape:
        raise ValueError("dimension mismatch between state and observable")
    mean = float(np.trace(m @ X).real)
    var = float(np.trace(m @ X @ X).real) - mean * mean
    w, V = np.linalg.eigh(X)
    probs = np.real(np.einsum("ij,jk,ki->i", V.conj().T, m, V))
    mean_dev = float(np.abs(w - mean) @ np.clip(probs, 0.0, None))
    return mean, max(var, 0.0), mean_dev


def variance(rho, X: np.ndarray) -> float:
    return moments(rho, X)[1]


def covariance(rho, X: np.ndarray, Y: np.ndarray) -> float:
    """Symmetrized covariance ⟨{X−⟨X⟩, Y−⟨Y⟩}⟩/2."""
    m = _mat(rho)
    X = assert_hermitian(X, "X")
    Y = assert_hermitian(Y, "Y")
    if X.shape != Y.shape or m.shape != X.shape:
        raise ValueError("dimension mismatch")
    ex = np.trace(m @ X).real
    ey = np.trace(m @ Y).real
    anti = np.trace(m @ (X @ Y + Y @ X)).real / 2.0
    return float(anti - ex * ey)


def qfi(rho, X: np.ndarray, rank_cutoff: float = RANK_CUTOFF) -> float:
    """Quantum Fisher information of ρ with respect to the generator X."""
    m = _mat(rho)
    X = assert_hermitian(X, "X")
    w, V = np.linalg.eigh(m)
    Xe = V.conj().T @ X @ V
    rs = w[:, None] + w[None, :]
    diff = w[:, None] - w[None, :]
    mask = rs > rank_cutoff
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(mask, diff**2 / np.where(mask, rs, 1.0), 0.0)
    return float(2.0 * np.sum(coef * np.abs(Xe) ** 2))


def qfi_matrix(rho, generators: Sequence[np.ndarray], rank_cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """Fisher information matrix F_ab = 2 Σ (r_i−r_j)²/(r_i+r_j) X^a_ij X^b_ji."""
    m = _mat(rho)
    gens = [assert_hermitian(G, f"generator {a}") for a, G in enumerate(generators)]
    if any(G.shape != m.shape for G in gens):
        raise ValueError("generator dimension mismatch")
    w, V = np.linalg.eigh(m)
    rs = w[:, None] + w[None, :]
    diff = w[:, None] - w[None, :]
    mask = rs > rank_cutoff
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(mask, diff**2 / np.where(mask, rs, 1.0), 0.0)
    Xe = [V.conj().T @ G @ V for G in gens]
    k = len(gens)
    F = np.zeros((k, k))
    for a in range(k):
        for b in range(a, k):
            val = 2.0 * np.sum(coef * Xe[a] * Xe[b].T).real
            F[a, b] = F[b, a] = val
    return F


def minimal_variance_reference(rho: DensityMatrix, X: np.ndarray, ref_label: str = "ref"):
    """Purification |Ψ⟩ and reference observable X_R with 4V_Ψ(X⊗1 + 1⊗X_R) = QFI.

    In the eigenbasis {r_l, |l⟩} of ρ the minimizer has matrix elements
    (X_R)_{l'l} = −2√(r_l r_{l'})/(r_l + r_{l'}) · ⟨l|X|l'⟩.
    """
    X = assert_hermitian(X, "X")
    w, V = np.linalg.eigh(rho.matrix)
    keep = w > RANK_CUTOFF
    w, V = w[keep], V[:, keep]
    r = len(w)
    d = rho.dim
    psi = PureState((V * np.sqrt(w)).reshape(d * r), rho.layout.extend((ref_label, r)))
    Xe = V.conj().T @ X @ V  # X compressed to the support eigenbasis
    denom = w[:, None] + w[None, :]
    coef = 2.0 * np.sqrt(np.outer(w, w)) / denom
    X_R = -(coef * Xe).T  # (X_R)_{l'l} in the reference basis |l_ref⟩
    return psi, X_R


@dataclass(frozen=True)
class MvdReport:
    """Both mean-variance-distance trade-off variants for one (ρ, σ, X)."""

    delta: float
    distance: float
    lhs_linear: float
    rhs_linear: float
    lhs_squared: float
    rhs_squared: float
    satisfied: bool


def mvd_tradeoff_check(rho, sigma, X: np.ndarray, slack: float = 1e-9) -> MvdReport:
    """|Δ| ≤ D_F(√V_ρ + √V_σ + |Δ|), and the squared variant
    Δ² ≤ D_F²((√V_ρ + √V_σ)² + Δ²)."""
    _check_same_layout(rho, sigma)
    X = assert_hermitian(X, "X")
    d = purified_distance(rho, sigma)
    delta = float(np.trace((_mat(rho) - _mat(sigma)) @ X).real)
    vr = np.sqrt(max(variance(rho, X), 0.0))
    vs = np.sqrt(max(variance(sigma, X), 0.0))
    rhs_lin = d * (vr + vs + abs(delta))
    rhs_sq = d * d * ((vr + vs) ** 2 + delta * delta)
    ok = abs(delta) <= rhs_lin + slack and delta * delta <= rhs_sq + slack
    return MvdReport(delta, d, abs(delta), rhs_lin, delta * delta, rhs_sq, ok)
