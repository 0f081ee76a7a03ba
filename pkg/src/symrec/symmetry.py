"""Conserved-charge bookkeeping: conservation checks, charge sectors,
block-Haar sampling, covariance checks, and covariant erasure noise.

A unitary with the conservation law U(X_in)U† = X_out is block diagonal
across the eigenspaces of the total charge; the symmetric scrambler model
draws an independent Haar unitary on each block.  Naive QR orthonormalization
of a Ginibre matrix is *not* Haar distributed: after QR the triangular
factor's diagonal phases must be absorbed so that R has a positive real
diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import QuantumChannel
from .config import SECTOR_GAP_TOL
from .tensor import (
    SystemLayout,
    as_complex,
    assert_hermitian,
    assert_unitary,
    embed_operator,
    op_norm,
)


@dataclass(frozen=True)
class ChargeSpec:
    """Local Hermitian charges per subsystem on the input and output splits."""

    input_layout: SystemLayout
    output_layout: SystemLayout
    local_input: dict[str, np.ndarray]
    local_output: dict[str, np.ndarray]

    def __post_init__(self):
        if self.input_layout.total_dim != self.output_layout.total_dim:
            raise ValueError("input and output layouts must have equal total dimension")
        for name, layout, charges in (
            ("input", self.input_layout, self.local_input),
            ("output", self.output_layout, self.local_output),
        ):
            for lab, X in charges.items():
                if lab not in layout.labels:
                    raise KeyError(f"{name} charge label {lab!r} not in layout")
                X = assert_hermitian(as_complex(X), f"{name} charge on {lab!r}")
                d = layout.dim(lab)
                if X.shape != (d, d):
                    raise ValueError(f"{name} charge on {lab!r} has shape {X.shape}, dim {d}")

    def total_input(self) -> np.ndarray:
        return sum(
            embed_operator(X, self.input_layout, [lab]) for lab, X in self.local_input.items()
        )

    def total_output(self) -> np.ndarray:
        return sum(
            embed_operator(X, self.output_layout, [lab]) for lab, X in self.local_output.items()
        )


@dataclass(frozen=True)
class ViolationReport:
    """Z = U(X_in)U† − X_out and its eigenvalue spread."""

    Z: np.ndarray
    spread_DZ: float


def conservation_check(U: np.ndarray, charges: ChargeSpec) -> ViolationReport:
    U = assert_unitary(U, "U")
    X_in = charges.total_input()
    X_out = charges.total_output()
    Z = U @ X_in @ U.conj().T - X_out
    w = np.linalg.eigvalsh((Z + Z.conj().T) / 2)
    return ViolationReport(Z=Z, spread_DZ=float(w.max() - w.min()))


@dataclass(frozen=True)
class ChargeSector:
    value: float
    dim: int
    basis: np.ndarray  # (d, dim) isometry of sector basis columns
    projector: np.ndarray


def charge_sectors(X_total: np.ndarray, gap_tol: float = SECTOR_GAP_TOL) -> list[ChargeSector]:
    """Eigenspaces of the total charge, clustered with the given gap tolerance.

    Diagonal charges take a fast path that keeps the computational basis, so
    block-Haar samples are exactly block structured there.
    """
    X = assert_hermitian(as_complex(X_total), "X_total")
    d = X.shape[0]
    off = X - np.diag(np.diag(X))
    if float(np.abs(off).max()) <= 1e-12:
        vals = np.real(np.diag(X))
        vecs = np.eye(d, dtype=complex)
        order = np.argsort(vals, kind="stable")
    else:
        vals, vecs = np.linalg.eigh(X)
        order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    sectors = []
    i = 0
    while i < d:
        j = i
        while j + 1 < d and vals[j + 1] - vals[i] <= gap_tol:
            j += 1
        basis = vecs[:, i : j + 1]
        sectors.append(
            ChargeSector(
                value=float(np.mean(vals[i : j + 1])),
                dim=j - i + 1,
                basis=basis,
                projector=basis @ basis.conj().T,
            )
        )
        i = j + 1
    return sectors


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via Ginibre + QR with the positive-diagonal phase fix."""
    G = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(G)
    ph = np.diag(R).copy()
    ph[np.abs(ph) < 1e-30] = 1.0
    return Q * (ph / np.abs(ph))


def sample_block_haar(sectors: Sequence[ChargeSector], rng_seed) -> np.ndarray:
    """Independent Haar unitary on each charge sector, embedded as ⊕_m U^(m)."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    d = sectors[0].projector.shape[0]
    if sum(s.dim for s in sectors) != d:
        raise ValueError("sectors do not cover the space")
    U = np.zeros((d, d), dtype=complex)
    for s in sectors:
        Um = haar_unitary(s.dim, rng)
        U += s.basis @ Um @ s.basis.conj().T
    return U


def covariance_check(
    channel: QuantumChannel,
    X_in: np.ndarray,
    X_out: np.ndarray,
    n_theta: int = 16,
) -> float:
    """Max deviation ‖C(e^{iXθ}·e^{−iXθ}) − e^{iX'θ}C(·)e^{−iX'θ}‖ over a θ
    grid and the matrix-unit probe basis (covariance is linear in the input,
    so matrix units span all states)."""
    X_in = assert_hermitian(as_complex(X_in), "X_in")
    X_out = assert_hermitian(as_complex(X_out), "X_out")
    d_in, d_out = channel.d_in, channel.d_out
    if X_in.shape != (d_in, d_in) or X_out.shape != (d_out, d_out):
        raise ValueError("charge dimensions do not match the channel")
    win, Vin = np.linalg.eigh(X_in)
    wout, Vout = np.linalg.eigh(X_out)
    thetas = np.arange(n_theta) * (2 * np.pi / n_theta)
    worst = 0.0
    # probe with matrix units in the X_in eigenbasis
    units = []
    for i in range(d_in):
        for j in range(d_in):
            E = np.outer(Vin[:, i], Vin[:, j].conj())
            units.append((E, channel.apply_matrix(E)))
    for th in thetas:
        uin = Vin @ np.diag(np.exp(1j * th * win)) @ Vin.conj().T
        uout = Vout @ np.diag(np.exp(1j * th * wout)) @ Vout.conj().T
        for E, CE in units:
            lhs = channel.apply_matrix(uin @ E @ uin.conj().T)
            rhs = uout @ CE @ uout.conj().T
            worst = max(worst, op_norm(lhs - rhs))
    return float(worst)


def erasure_noise(
    physical_layout: SystemLayout,
    reset_states: Sequence[np.ndarray],
    register_label: str = "loc",
) -> QuantumChannel:
    """Known-location erasure: with probability 1/N subsystem i is replaced by
    its reset state and the location recorded in a classical register."""
    n = len(physical_layout.subsystems)
    if len(reset_states) != n:
        raise ValueError("need one reset state per subsystem")
    dims = physical_layout.dims
    d_p = physical_layout.total_dim
    kraus = []
    for i, (lab, d_i) in enumerate(physical_layout.subsystems):
        tau = as_complex(reset_states[i]).reshape(-1)
        if tau.shape[0] != d_i or abs(np.linalg.norm(tau) - 1.0) > 1e-10:
            raise ValueError(f"invalid reset state on {lab!r}")
        loc = np.zeros(n, dtype=complex)
        loc[i] = 1.0
        for m in range(d_i):
            basis_m = np.zeros(d_i, dtype=complex)
            basis_m[m] = 1.0
            local = np.outer(tau, basis_m)  # |τ_i⟩⟨m| on P_i
            K_p = embed_operator(local, physical_layout, [lab])
            kraus.append(np.kron(loc.reshape(n, 1), K_p) / np.sqrt(n))
    out_layout = SystemLayout.of((register_label, n)) * physical_layout
    return QuantumChannel.from_kraus(kraus, physical_layout, out_layout)


def covariant_erasure_noise(
    physical_layout: SystemLayout,
    local_charges: Sequence[np.ndarray],
    register_label: str = "loc",
) -> tuple[QuantumChannel, list[float]]:
    """Erasure noise covariantized by resetting each subsystem to a zero-charge
    eigenvector.  When a local charge has no zero eigenvalue the lowest
    eigenvector is used and the induced constant shift is reported (a shift
    Z = μ·1 leaves the spread 𝒟_Z at zero)."""
    resets = []
    shifts = []
    for (lab, d_i), X_i in zip(physical_layout.subsystems, local_charges):
        X_i = assert_hermitian(as_complex(X_i), f"charge on {lab!r}")
        w, V = np.linalg.eigh(X_i)
        zero = np.where(np.abs(w) <= 1e-10)[0]
        idx = int(zero[0]) if len(zero) else int(np.argmin(w))
        resets.append(V[:, idx])
        shifts.append(float(w[idx]))
    return erasure_noise(physical_layout, resets, register_label), shifts
