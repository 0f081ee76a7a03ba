"""Channels, scrambling instances, and recovery-error estimation.

A channel is stored as its Stinespring isometry V: input → output ⊗ env, so
complete positivity and trace preservation are structural.  The recovery
error δ (a minimum over all CPTP recoveries) is never computed exactly;
instead `optimize_recovery` returns a certified *upper* bound: the exact
purified distance achieved by an explicit feasible recovery, found by
alternating maximization of the Uhlmann fidelity.  Both alternation steps are
closed-form (normalized overlap vector / polar decomposition via SVD), so the
fidelity sequence is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.optimize import minimize

from .config import RANK_CUTOFF, TRACE_TOL
from .states import (
    DensityMatrix,
    PureState,
    fidelity,
    fidelity_with_pure,
    purified_distance,
)
from .tensor import SystemLayout, as_complex, assert_unitary, psd_sqrt

if TYPE_CHECKING:  # avoid a runtime cycle with symmetry.py
    from .symmetry import ChargeSpec

PETZ_BLEND = 1e-9
SEESAW_TOL = 1e-10
SEESAW_MAX_ITERS = 500


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map stored as a Stinespring isometry (input → output ⊗ env)."""

    isometry: np.ndarray  # shape (d_out * d_env, d_in), env is the trailing factor
    input_layout: SystemLayout
    output_layout: SystemLayout
    env_dim: int

    def __post_init__(self):
        V = as_complex(self.isometry)
        object.__setattr__(self, "isometry", V)
        d_in = self.input_layout.total_dim
        d_out = self.output_layout.total_dim
        if V.shape != (d_out * self.env_dim, d_in):
            raise ValueError(
                f"isometry shape {V.shape} does not match "
                f"(out {d_out} × env {self.env_dim}, in {d_in})"
            )
        G = V.conj().T @ V - np.eye(d_in)
        if float(np.linalg.norm(G, 2)) > 1e-10:
            raise ValueError("Stinespring matrix is not an isometry within 1e-10")

    @property
    def d_in(self) -> int:
        return self.input_layout.total_dim

    @property
    def d_out(self) -> int:
        return self.output_layout.total_dim

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], input_layout, output_layout) -> "QuantumChannel":
        ks = [as_complex(K) for K in kraus]
        d_out, d_in = ks[0].shape
        # rows ordered as (out, env): row index = o * n_kraus + e
        V = np.stack(ks, axis=1).reshape(d_out * len(ks), d_in)
        return cls(V, input_layout, output_layout, len(ks))

    @classmethod
    def from_kraus_compressed(cls, kraus: Sequence[np.ndarray], input_layout, output_layout) -> "QuantumChannel":
        """Same channel with the Kraus set compressed to the Choi rank
        (≤ d_in · d_out), via the Choi matrix's eigenvectors."""
        ks = [as_complex(K) for K in kraus]
        d_out, d_in = ks[0].shape
        vecs = np.stack([K.reshape(-1) for K in ks])
        choi = vecs.T @ vecs.conj()  # Σ vec(K) vec(K)†, Hermitian PSD
        w, V = np.linalg.eigh(choi)
        keep = w > 1e-14
        new_ks = [np.sqrt(lam) * V[:, j].reshape(d_out, d_in) for j, lam in zip(np.where(keep)[0], w[keep])]
        Vs = np.stack(new_ks, axis=1).reshape(d_out * len(new_ks), d_in)
        # polar-correct the compression/TP residue to a machine-exact isometry
        H = Vs.conj().T @ Vs
        hw, hv = np.linalg.eigh(H)
        Vs = Vs @ (hv / np.sqrt(np.clip(hw, 1e-30, None))) @ hv.conj().T
        ch = cls(Vs, input_layout, output_layout, len(new_ks))
        return ch

    @classmethod
    def from_unitary(cls, U: np.ndarray, input_layout, output_layout=None) -> "QuantumChannel":
        U = assert_unitary(U)
        out = output_layout or input_layout
        return cls(U, input_layout, out, 1)

    @classmethod
    def identity(cls, layout: SystemLayout) -> "QuantumChannel":
        return cls.from_unitary(np.eye(layout.total_dim), layout)

    def kraus(self) -> list[np.ndarray]:
        T = self.isometry.reshape(self.d_out, self.env_dim, self.d_in)
        return [T[:, e, :] for e in range(self.env_dim)]

    def apply_matrix(self, M: np.ndarray) -> np.ndarray:
        """Linear extension Σ_e K_e M K_e† (M need not be a state)."""
        T = self.isometry.reshape(self.d_out, self.env_dim, self.d_in)
        return np.einsum("oei,ij,pej->op", T, as_complex(M), T.conj())

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.layout.total_dim != self.d_in:
            raise ValueError("input dimension mismatch")
        return DensityMatrix(self.apply_matrix(rho.matrix), self.output_layout)

    def adjoint_apply(self, X: np.ndarray) -> np.ndarray:
        """Heisenberg-picture adjoint: X ↦ V†(X ⊗ 1_env)V."""
        T = self.isometry.reshape(self.d_out, self.env_dim, self.d_in)
        return np.einsum("oei,op,pej->ij", T.conj(), as_complex(X), T)

    def compose(self, before: "QuantumChannel") -> "QuantumChannel":
        """self ∘ before, with environments stacked."""
        if before.d_out != self.d_in:
            raise ValueError("composition dimension mismatch")
        T2 = self.isometry.reshape(self.d_out, self.env_dim, self.d_in)
        T1 = before.isometry.reshape(before.d_out, before.env_dim, before.d_in)
        # (out2, env2, env1, in1)
        C = np.einsum("oei,ifj->oefj", T2, T1)
        env = self.env_dim * before.env_dim
        V = C.reshape(self.d_out * env, before.d_in)
        return QuantumChannel(V, before.input_layout, self.output_layout, env)


def apply_channel(ch: QuantumChannel, rho: DensityMatrix, spectators: Sequence[str] = ()) -> DensityMatrix:
    """Apply id_spectators ⊗ ch to a state whose layout contains both parts.

    The result layout is (spectators in their original order) ⊗ ch.output_layout.
    """
    spec = list(spectators)
    in_labels = list(ch.input_layout.labels)
    if set(spec) | set(in_labels) != set(rho.layout.labels) or set(spec) & set(in_labels):
        raise ValueError("spectators plus channel input must partition the state's labels")
    dims = rho.layout.dims
    n = len(dims)
    order = [rho.layout.index(lab) for lab in spec] + [rho.layout.index(lab) for lab in in_labels]
    T = rho.matrix.reshape(dims + dims)
    T = np.transpose(T, order + [n + o for o in order])
    ds = int(np.prod([dims[i] for i in order[: len(spec)]])) if spec else 1
    di = ch.d_in
    T = T.reshape(ds, di, ds, di)
    K = ch.isometry.reshape(ch.d_out, ch.env_dim, di)
    out = np.einsum("oei,sitj,pej->sotp", K, T, K.conj())
    d_new = ds * ch.d_out
    layout = rho.layout.restrict(spec) * ch.output_layout if spec else ch.output_layout
    return DensityMatrix(out.reshape(d_new, d_new), layout)


@dataclass(frozen=True)
class ScramblingInstance:
    """One recovery problem: (ψ_{AR_A}, φ_{BR_B}, U, output split, charges)."""

    psi: PureState  # on layout [A, RA]
    phi: PureState  # on layout [B, RB]
    U: np.ndarray  # unitary on A ⊗ B
    out_dims: tuple[int, int]  # (dim A', dim B') with product = dim A · dim B
    charges: "ChargeSpec | None" = None

    def __post_init__(self):
        assert_unitary(self.U, "U")
        if self.U.shape[0] != self.d_A * self.d_B:
            raise ValueError("U dimension does not match A ⊗ B")
        if self.out_dims[0] * self.out_dims[1] != self.d_A * self.d_B:
            raise ValueError("output split must preserve the total dimension")

    @property
    def d_A(self) -> int:
        return self.psi.layout.dims[0]

    @property
    def d_RA(self) -> int:
        return self.psi.layout.dims[1]

    @property
    def d_B(self) -> int:
        return self.phi.layout.dims[0]

    @property
    def d_RB(self) -> int:
        return self.phi.layout.dims[1]

    @property
    def d_Ap(self) -> int:
        return self.out_dims[0]

    @property
    def d_Bp(self) -> int:
        return self.out_dims[1]

    def rho_A(self) -> DensityMatrix:
        return self.psi.partial_trace([self.psi.layout.labels[0]])

    def rho_B(self) -> DensityMatrix:
        return self.phi.partial_trace([self.phi.layout.labels[0]])

    def channel(self) -> QuantumChannel:
        """ℰ: A → A' induced by U and φ_{BR_B}, environment B' ⊗ R_B."""
        dA, dB, dRB = self.d_A, self.d_B, self.d_RB
        dAp, dBp = self.out_dims
        phi = self.phi.amplitudes.reshape(dB, dRB)
        # |a⟩ ↦ (U ⊗ 1_RB)(|a⟩ ⊗ |φ⟩), output split (Ap, Bp, RB)
        Urs = self.U.reshape(dA * dB, dA, dB)
        W = np.einsum("xab,br->xar", Urs, phi).reshape(dAp, dBp, dA, dRB)
        # rows (out=Ap, env=(Bp,RB))
        V = np.transpose(W, (0, 1, 3, 2)).reshape(dAp * dBp * dRB, dA)
        in_layout = SystemLayout.of(("A", dA))
        out_layout = SystemLayout.of(("Ap", dAp))
        return QuantumChannel(V, in_layout, out_layout, dBp * dRB)

    def channel_to_ApRB(self) -> QuantumChannel:
        """𝒯: A → A' ⊗ R_B (what the R_B-assisted recovery acts on), env B'."""
        dA, dB, dRB = self.d_A, self.d_B, self.d_RB
        dAp, dBp = self.out_dims
        phi = self.phi.amplitudes.reshape(dB, dRB)
        Urs = self.U.reshape(dA * dB, dA, dB)
        W = np.einsum("xab,br->xar", Urs, phi).reshape(dAp, dBp, dA, dRB)
        # rows (out=(Ap,RB), env=Bp)
        V = np.transpose(W, (0, 3, 1, 2)).reshape(dAp * dRB * dBp, dA)
        in_layout = SystemLayout.of(("A", dA))
        out_layout = SystemLayout.of(("Ap", dAp), ("RB", dRB))
        return QuantumChannel(V, in_layout, out_layout, dBp)


@dataclass(frozen=True)
class ScrambleResult:
    final: PureState  # on layout [RA, Ap, Bp, RB]
    rho_f_Ap: DensityMatrix
    rho_f_Bp: DensityMatrix
    rho_f_Ap_RB: DensityMatrix
    rho_f_RA_Bp: DensityMatrix


def final_state(instance: ScramblingInstance) -> PureState:
    """(1 ⊗ U ⊗ 1)(ψ ⊗ φ) as a pure state on [RA, A', B', RB]."""
    dA, dRA = instance.d_A, instance.d_RA
    dB, dRB = instance.d_B, instance.d_RB
    dAp, dBp = instance.out_dims
    psi = instance.psi.amplitudes.reshape(dA, dRA)
    phi = instance.phi.amplitudes.reshape(dB, dRB)
    G = np.einsum("ar,bs->rabs", psi, phi)  # (RA, A, B, RB)
    G = G.reshape(dRA, dA * dB, dRB)
    G = np.einsum("xy,ryb->rxb", instance.U, G)
    G = G.reshape(dRA, dAp, dBp, dRB)
    layout = SystemLayout.of(("RA", dRA), ("Ap", dAp), ("Bp", dBp), ("RB", dRB))
    return PureState(G.reshape(-1), layout)


def scramble(instance: ScramblingInstance) -> ScrambleResult:
    fin = final_state(instance)
    return ScrambleResult(
        final=fin,
        rho_f_Ap=fin.partial_trace(["Ap"]),
        rho_f_Bp=fin.partial_trace(["Bp"]),
        rho_f_Ap_RB=fin.partial_trace(["Ap", "RB"]),
        rho_f_RA_Bp=fin.partial_trace(["RA", "Bp"]),
    )


def final_Bp_state(instance: ScramblingInstance, rho_A: np.ndarray) -> np.ndarray:
    """Tr_{A'}[U (ρ_A ⊗ ρ_B) U†] for an arbitrary input on A."""
    dA, dB = instance.d_A, instance.d_B
    dAp, dBp = instance.out_dims
    rho_B = instance.rho_B().matrix
    joint = np.kron(as_complex(rho_A), rho_B)
    out = instance.U @ joint @ instance.U.conj().T
    T = out.reshape(dAp, dBp, dAp, dBp)
    return np.einsum("abad->bd", T)


def final_Ap_state(instance: ScramblingInstance, rho_A: np.ndarray) -> np.ndarray:
    dAp, dBp = instance.out_dims
    rho_B = instance.rho_B().matrix
    joint = np.kron(as_complex(rho_A), rho_B)
    out = instance.U @ joint @ instance.U.conj().T
    T = out.reshape(dAp, dBp, dAp, dBp)
    return np.einsum("abcb->ac", T)


def petz_recovery(ch: QuantumChannel, prior: DensityMatrix) -> QuantumChannel:
    """Transpose-channel recovery for `ch` about `prior`.

    The prior is blended with 1e-9 of the maximally mixed state so its square
    root is full rank; a completion term handles any kernel of ch(prior) so
    the returned map is CPTP on the whole output space.
    """
    d = prior.dim
    if ch.d_in != d:
        raise ValueError("prior dimension does not match the channel input")
    blend = (1.0 - PETZ_BLEND) * prior.matrix + PETZ_BLEND * np.eye(d) / d
    sqrt_prior = psd_sqrt(blend)
    sigma = ch.apply_matrix(blend)
    w, V = np.linalg.eigh(sigma)
    # relative cutoff: near-null σ modes go through the completion instead of
    # amplifying eigensolver noise in σ^{-1/2}
    keep = w > max(RANK_CUTOFF, 1e-10 * float(w.max()))
    inv_sqrt = (V[:, keep] / np.sqrt(w[keep])) @ V[:, keep].conj().T
    kraus = [sqrt_prior @ K.conj().T @ inv_sqrt for K in ch.kraus()]
    # completion: route ker(σ) into the blended prior
    kernel = V[:, ~keep]
    if kernel.shape[1]:
        wp, Vp = np.linalg.eigh(blend)
        for m in range(len(wp)):
            if wp[m] <= RANK_CUTOFF:
                continue
            for j in range(kernel.shape[1]):
                kraus.append(np.sqrt(wp[m]) * np.outer(Vp[:, m], kernel[:, j].conj()))
    # Choi-rank compression keeps the environment ≤ d_in · d_out
    return QuantumChannel.from_kraus_compressed(kraus, ch.output_layout, ch.input_layout)


@dataclass
class RecoveryResult:
    recovery: QuantumChannel
    achieved_error: float
    fidelity: float
    iterations: int
    converged: bool
    mode: str
    error_trace: list[float] = field(default_factory=list)


def _seesaw(psi_t: np.ndarray, Psi: np.ndarray, d_out: int, d_env: int, W0: np.ndarray,
            max_iters: int, tol: float) -> tuple[np.ndarray, float, int, bool, list[float]]:
    """Alternating Uhlmann maximization.

    psi_t: target, axes (K, O).  Psi: global pure input, axes (K, I, P).
    W: isometry I → O ⊗ E, stored with axes (O, E, I).  Purifying systems of
    the recovered state are (E, P).
    """
    K, I, P = Psi.shape
    W = W0.reshape(d_out, d_env, I)
    fids = []
    f_prev = -1.0
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        T = np.einsum("oei,kip->koep", W, Psi)
        v = np.einsum("ko,koep->ep", psi_t.conj(), T)
        f = float(np.linalg.norm(v))
        fids.append(f)
        if f <= 1e-300:
            chi = np.zeros_like(v)
            chi.flat[0] = 1.0
        else:
            chi = v / f
        if abs(f - f_prev) < tol:
            converged = True
            break
        f_prev = f
        C = np.einsum("ko,ep,kip->oei", psi_t.conj(), chi.conj(), Psi)
        D = C.conj().reshape(d_out * d_env, I)
        U, _, Vh = np.linalg.svd(D, full_matrices=False)
        W = (U @ Vh).reshape(d_out, d_env, I)
    # fidelity for the final W
    T = np.einsum("oei,kip->koep", W, Psi)
    f = float(np.linalg.norm(np.einsum("ko,koep->ep", psi_t.conj(), T)))
    fids.append(f)
    return W.reshape(d_out * d_env, I), f, it, converged, fids


def _petz_isometry(ch: QuantumChannel, prior: DensityMatrix, d_env: int) -> np.ndarray | None:
    """Stinespring matrix of the Petz recovery, padded to environment d_env."""
    pz = petz_recovery(ch, prior)
    if pz.env_dim > d_env:
        return None
    V = pz.isometry.reshape(pz.d_out, pz.env_dim, pz.d_in)
    out = np.zeros((pz.d_out, d_env, pz.d_in), dtype=complex)
    out[:, : pz.env_dim, :] = V
    return out.reshape(pz.d_out * d_env, pz.d_in)


def _random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    Q, R = np.linalg.qr(G)
    ph = np.diag(R).copy()
    ph[np.abs(ph) < 1e-30] = 1.0
    return Q * (ph / np.abs(ph)).conj()


def optimize_recovery(
    instance: ScramblingInstance,
    mode: str = "with_RB",
    seed: int = 0,
    max_iters: int = SEESAW_MAX_ITERS,
    n_restarts: int = 3,
    extra_inits: Sequence[np.ndarray] = (),
) -> RecoveryResult:
    """Feasible-recovery upper bound on δ (mode 'with_RB') or δ̃ ('without_RB').

    The returned achieved_error is re-evaluated from the recovery channel's
    actual output state, not taken from the optimizer's internal value.
    """
    if mode not in ("with_RB", "without_RB"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    fin = final_state(instance)
    dRA, dAp, dBp, dRB = fin.layout.dims
    dA = instance.d_A
    G = fin.amplitudes.reshape(dRA, dAp, dBp, dRB)
    if mode == "with_RB":
        Psi = np.transpose(G, (0, 1, 3, 2)).reshape(dRA, dAp * dRB, dBp)
        d_in = dAp * dRB
        fwd = instance.channel_to_ApRB()
    else:
        Psi = G.reshape(dRA, dAp, dBp * dRB)
        d_in = dAp
        fwd = instance.channel()
    d_env = d_in * dA
    psi_t = instance.psi.amplitudes.reshape(dA, instance.d_RA).T  # axes (RA, A)

    inits: list[np.ndarray] = []
    pz = _petz_isometry(fwd, instance.rho_A(), d_env)
    if pz is not None:
        inits.append(pz)
    for W in extra_inits:
        W = as_complex(W)
        if W.shape == (dA * d_env, d_in):
            inits.append(W)
        else:
            raise ValueError(f"extra init shape {W.shape}, expected {(dA * d_env, d_in)}")
    for _ in range(n_restarts):
        inits.append(_random_isometry(dA * d_env, d_in, rng))

    best = None
    for W0 in inits:
        W, f, its, conv, fids = _seesaw(psi_t, Psi, dA, d_env, W0, max_iters, SEESAW_TOL)
        # monotone alternating maximization: fidelity never decreases
        assert all(f2 >= f1 - 1e-9 for f1, f2 in zip(fids, fids[1:])), "seesaw lost monotonicity"
        errs = [float(np.sqrt(max(0.0, 1 - x * x))) for x in fids]
        if best is None or f > best[1]:
            best = (W, f, its, conv, errs)
    W, f, its, conv, errs = best
    out_layout = SystemLayout.of(("A", dA))

    # re-evaluate from the returned isometry, cancellation-free:
    # D² = ‖T − ψ ⊗ v‖² for T = (1 ⊗ W)Ψ and v = ⟨ψ|T⟩ (exact identity)
    Wt = W.reshape(dA, d_env, d_in)
    T = np.einsum("oei,kip->koep", Wt, Psi)
    v = np.einsum("ko,koep->ep", psi_t.conj(), T)
    T_perp = T - np.einsum("ko,ep->koep", psi_t, v)
    err = float(np.linalg.norm(T_perp))
    achieved_f = float(np.linalg.norm(v))

    # consistency cross-check through the density-matrix path
    keep = ["Ap", "RB"] if mode == "with_RB" else ["Ap"]
    marg = fin.partial_trace(["RA"] + keep)
    rec_in_layout = SystemLayout(tuple(marg.layout.subsystems[1:]))
    recovery_ch = QuantumChannel(W, rec_in_layout, out_layout, d_env)
    out = apply_channel(recovery_ch, marg, spectators=["RA"])
    f_dm = fidelity_with_pure(psi_t.reshape(-1), out)
    assert abs(f_dm - achieved_f) <= 1e-7, "recovery fidelity paths disagree"
    return RecoveryResult(
        recovery=recovery_ch,
        achieved_error=err,
        fidelity=achieved_f,
        iterations=its,
        converged=conv,
        mode=mode,
        error_trace=errs,
    )


@dataclass(frozen=True)
class ImplementationErrorEstimate:
    max_error: float
    entangled_input_error: float
    worst_input: np.ndarray


def _pure_input_error(T_kraus: list[np.ndarray], vec: np.ndarray, dS: int, dR: int) -> float:
    """D_F(ψ, (id_R ⊗ T)ψ)² for ψ given as a vector on (S, R)."""
    psi = vec.reshape(dS, dR)
    f2 = 0.0
    for K in T_kraus:
        f2 += abs(np.einsum("sr,st,tr->", psi.conj(), K, psi)) ** 2
    return max(0.0, 1.0 - f2)


def implementation_error(
    instance: ScramblingInstance,
    U_target: np.ndarray,
    seed: int = 0,
    n_restarts: int = 8,
) -> ImplementationErrorEstimate:
    """Lower-biased estimate of δ_U = max over pure ψ_{AR_A} of
    D_F(ψ, id ⊗ 𝒰†∘ℰ(ψ)), via ascent from the maximally entangled input plus
    random restarts."""
    if instance.d_Ap != instance.d_A:
        raise ValueError("implementation error needs A' = A")
    U_target = assert_unitary(U_target, "U_target")
    dA = instance.d_A
    ch = instance.channel()
    kraus = [U_target.conj().T @ K for K in ch.kraus()]
    dR = dA  # Schmidt rank of any pure ψ_{AR_A} is ≤ dA
    rng = np.random.default_rng(seed)

    def err2(x):
        v = x[: dA * dR] + 1j * x[dA * dR :]
        n = np.linalg.norm(v)
        if n < 1e-12:
            return 0.0
        return _pure_input_error(kraus, v / n, dA, dR)

    maxent = np.eye(dA).reshape(-1) / np.sqrt(dA)
    ent_err = float(np.sqrt(_pure_input_error(kraus, maxent, dA, dR)))
    best_val, best_vec = ent_err**2, maxent
    starts = [maxent]
    for _ in range(n_restarts):
        v = rng.normal(size=dA * dR) + 1j * rng.normal(size=dA * dR)
        starts.append(v / np.linalg.norm(v))
    for v0 in starts:
        x0 = np.concatenate([v0.real, v0.imag])
        res = minimize(lambda x: -err2(x), x0, method="L-BFGS-B")
        val = -res.fun
        if val > best_val:
            v = res.x[: dA * dR] + 1j * res.x[dA * dR :]
            best_val, best_vec = val, v / np.linalg.norm(v)
    return ImplementationErrorEstimate(
        max_error=float(np.sqrt(max(best_val, 0.0))),
        entangled_input_error=ent_err,
        worst_input=best_vec,
    )


@dataclass(frozen=True)
class CodeErrorEstimate:
    worst_case: float
    entangled_input_error: float
    recovery: QuantumChannel
    worst_input: np.ndarray


def _recovery_for_pure_input(psi: np.ndarray, dS: int, dR: int, V_ch: np.ndarray,
                             d_out_ch: int, d_env_ch: int, d_logical: int,
                             rng: np.random.Generator, max_iters: int = SEESAW_MAX_ITERS,
                             n_restarts: int = 2, inits: Sequence[np.ndarray] = ()):
    """Seesaw-optimal recovery for a fixed pure input ψ on (S, R)."""
    psi_m = psi.reshape(dS, dR)
    T = V_ch.reshape(d_out_ch, d_env_ch, dS)
    Psi = np.einsum("sr,oes->roe", psi_m, T).reshape(dR, d_out_ch, d_env_ch)
    d_env = d_out_ch * d_logical
    psi_t = psi_m.T  # (R, S); target output system S has dim d_logical = dS
    cand: list[np.ndarray] = list(inits)
    for _ in range(n_restarts + 1):
        cand.append(_random_isometry(d_logical * d_env, d_out_ch, rng))
    best = None
    for W0 in cand:
        W, f, its, conv, _ = _seesaw(psi_t, Psi, d_logical, d_env, W0, max_iters, SEESAW_TOL)
        if best is None or f > best[1]:
            best = (W, f, its, conv)
    return best


def code_error(
    code: QuantumChannel,
    noise: QuantumChannel,
    seed: int = 0,
    outer_rounds: int = 20,
    n_probe: int = 32,
) -> CodeErrorEstimate:
    """Alternating min-max estimate of δ_C for an isometric code and a noise map.

    The recovery step seesaws the fidelity for the current worst input; the
    input step maximizes the error of the current recovery over pure inputs
    (maximally entangled + random probes + a quasi-Newton polish).  The result
    upper-bounds δ_C in the recovery and lower-bounds the inner max, so it is
    reported as an estimate, never as exact.
    """
    if code.env_dim != 1:
        raise ValueError("code must be an isometry (trivial environment)")
    comp = noise.compose(code)  # L -> P'
    dL = comp.d_in
    dR = dL
    dP = comp.d_out
    rng = np.random.default_rng(seed)
    maxent = np.eye(dL).reshape(-1) / np.sqrt(dL)

    probes = [maxent]
    for _ in range(n_probe):
        v = rng.normal(size=dL * dR) + 1j * rng.normal(size=dL * dR)
        probes.append(v / np.linalg.norm(v))

    def worst_over_probes(rec: QuantumChannel):
        T_kraus = _compose_kraus(rec, comp)
        best_e2, best_v = -1.0, probes[0]
        for v in probes:
            e2 = _pure_input_error(T_kraus, v, dL, dR)
            if e2 > best_e2:
                best_e2, best_v = e2, v
        # polish the worst probe
        x0 = np.concatenate([best_v.real, best_v.imag])

        def neg(x):
            w = x[: dL * dR] + 1j * x[dL * dR :]
            n = np.linalg.norm(w)
            if n < 1e-12:
                return 0.0
            return -_pure_input_error(T_kraus, w / n, dL, dR)

        res = minimize(neg, x0, method="L-BFGS-B")
        if -res.fun > best_e2:
            w = res.x[: dL * dR] + 1j * res.x[dL * dR :]
            best_e2, best_v = -res.fun, w / np.linalg.norm(w)
        return float(np.sqrt(max(best_e2, 0.0))), best_v

    # Petz initialization about the maximally mixed logical prior
    d_env_rec = dP * dL
    petz_init = None
    from .tensor import SystemLayout as _SL

    pz = petz_recovery(comp, DensityMatrix(np.eye(dL) / dL, comp.input_layout))
    if pz.env_dim <= d_env_rec:
        Vp = pz.isometry.reshape(dL, pz.env_dim, dP)
        pad = np.zeros((dL, d_env_rec, dP), dtype=complex)
        pad[:, : pz.env_dim, :] = Vp
        petz_init = pad.reshape(dL * d_env_rec, dP)

    current_input = maxent
    best_pair = None
    ent_err = None
    prev_worst = None
    for rnd in range(outer_rounds):
        W, f, _, _ = _recovery_for_pure_input(
            current_input, dL, dR, comp.isometry, dP, comp.env_dim, dL, rng,
            inits=[petz_init] if petz_init is not None else (),
        )
        rec = QuantumChannel(W, comp.output_layout, code.input_layout, dP * dL)
        worst_err, worst_vec = worst_over_probes(rec)
        if ent_err is None:
            T_kraus = _compose_kraus(rec, comp)
            ent_err = float(np.sqrt(_pure_input_error(T_kraus, maxent, dL, dR)))
        if best_pair is None or worst_err < best_pair[0]:
            best_pair = (worst_err, rec, worst_vec)
        stalled = prev_worst is not None and abs(worst_err - prev_worst) < 1e-9
        if stalled or np.allclose(worst_vec, current_input, atol=1e-8):
            break
        prev_worst = worst_err
        current_input = worst_vec
    worst_err, rec, worst_vec = best_pair
    return CodeErrorEstimate(worst_err, ent_err, rec, worst_vec)


def _compose_kraus(after: QuantumChannel, before: QuantumChannel) -> list[np.ndarray]:
    return [Ka @ Kb for Ka in after.kraus() for Kb in before.kraus()]


@dataclass(frozen=True)
class DecouplingResult:
    centered_sum: float  # Σ_j p_j D_F(ρ^f_{j,B'}, ρ^f_{B'})²
    per_term: list[float]
    sigma_sum: float  # Σ_j p_j D_F(ρ^f_{j,B'}, σ)² for the optimized σ
    sigma: np.ndarray


def decoupling_residuals(
    instance: ScramblingInstance,
    decomposition,
    sigma_iters: int = 40,
) -> DecouplingResult:
    """Residual dependence of B''s final state on the input decomposition.

    Accepts a bounds.Decomposition or a raw sequence of (p_j, ρ_j) pairs.
    Returns both the ρ^f_{B'}-centred sum (compared against 4δ²) and a
    feasible upper estimate of min_σ Σ p_j D_F(ρ^f_{j,B'}, σ)² obtained by
    alternating Uhlmann averaging started from σ = ρ^f_{B'}.
    """
    if hasattr(decomposition, "terms"):
        decomposition = decomposition.terms
    weights = np.array([p for p, _ in decomposition], dtype=float)
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("decomposition weights must sum to 1")
    rho_A = instance.rho_A().matrix
    mix = sum(p * as_complex(r) for p, r in decomposition)
    if float(np.linalg.norm(mix - rho_A)) > 1e-9:
        raise ValueError("decomposition does not reproduce ρ_A within 1e-9")

    finals = [final_Bp_state(instance, r) for _, r in decomposition]
    center = final_Bp_state(instance, rho_A)
    per_term = [purified_distance(f, center) ** 2 for f in finals]
    centered = float(np.dot(weights, per_term))

    # alternating averaging for the σ-centred variant
    d = center.shape[0]
    pur = []
    for f in finals:
        w, V = np.linalg.eigh(f)
        w = np.clip(w, 0.0, None)
        pur.append((V * np.sqrt(w)))  # columns: √r_l |l⟩; purification (S, R=d)
    w0, V0 = np.linalg.eigh(center)
    s_vec = (V0 * np.sqrt(np.clip(w0, 0, None))).reshape(-1)  # purification of σ₀
    s_vec = s_vec / np.linalg.norm(s_vec)
    for _ in range(sigma_iters):
        H = np.zeros((d * d, d * d), dtype=complex)
        s_m = s_vec.reshape(d, d)
        for p, phi in zip(weights, pur):
            # optimal Uhlmann unitary on the reference: polar of
            # M[r', r] = ⟨φ_j(·, r')| s(·, r)⟩
            M = phi.conj().T @ s_m
            U_, _, Vh_ = np.linalg.svd(M)
            Uopt = (U_ @ Vh_).conj()
            vecj = (phi @ Uopt.T).reshape(-1)
            H += p * np.outer(vecj, vecj.conj())
        _, eV = np.linalg.eigh(H)
        s_vec = eV[:, -1]
    sigma = s_vec.reshape(d, d)
    sigma = sigma @ sigma.conj().T
    sigma /= np.trace(sigma).real
    sig_terms = [purified_distance(f, sigma) ** 2 for f in finals]
    sigma_sum = float(np.dot(weights, sig_terms))
    if sigma_sum > centered:
        sigma, sigma_sum = center, centered
    return DecouplingResult(centered, per_term, sigma_sum, sigma)


def avg_from_entanglement_fidelity(f_ent_sq: float, d_q: int) -> float:
    """Average pure-state fidelity F²_avg = (d F²_ent + 1)/(d + 1)."""
    if not (0.0 <= f_ent_sq <= 1.0 + 1e-12):
        raise ValueError("entanglement fidelity squared must lie in [0, 1]")
    if d_q < 1:
        raise ValueError("dimension must be at least 1")
    return float((d_q * f_ent_sq + 1.0) / (d_q + 1.0))
