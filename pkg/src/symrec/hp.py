"""Hayden-Preskill experiments with a conserved U(1) charge.

The diary A holds k qubits, the black hole B holds N, and l qubits of late
radiation A' are collected.  Per-qubit charges are diag(0, 1) (unit spread),
the total charge sectors are the Hamming-weight eigenspaces with binomial
dimensions, and the scrambler is an independent Haar unitary per sector.
The equidistribution error ε̂ entering the assembled bounds is always
measured on a probe set, never assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .bounds import hp_bounds
from .channels import ScramblingInstance
from .states import DensityMatrix, PureState, moments, purify
from .symmetry import ChargeSpec, charge_sectors, haar_unitary, sample_block_haar
from .tensor import SystemLayout, embed_operator

QUBIT_CHARGE = np.diag([0.0, 1.0]).astype(complex)
MAX_TOTAL_QUBITS = 12  # k + N; keeps the dense U within the 4096 cap


@dataclass(frozen=True)
class HPConfig:
    k: int
    N: int
    l: int
    s_window: int = 0
    seed: int = 0
    samples: int = 100
    psi_kind: str = "max_entangled"  # or "eigen_mixture"
    eigen_mixture: tuple[tuple[float, int], ...] | None = None  # (weight, charge value)
    phi_kind: str = "max_entangled"  # or "sector_truncated"

    def __post_init__(self):
        if self.k < 1 or self.N < 1 or self.l < 0:
            raise ValueError("need k ≥ 1, N ≥ 1, l ≥ 0")
        if self.l > self.N + self.k:
            raise ValueError("l may not exceed N + k")
        if self.k + self.N > MAX_TOTAL_QUBITS:
            raise ValueError(f"k + N capped at {MAX_TOTAL_QUBITS} qubits")
        if self.psi_kind not in ("max_entangled", "eigen_mixture"):
            raise ValueError(f"unknown psi_kind {self.psi_kind!r}")
        if self.phi_kind not in ("max_entangled", "sector_truncated"):
            raise ValueError(f"unknown phi_kind {self.phi_kind!r}")
        if self.psi_kind == "eigen_mixture" and not self.eigen_mixture:
            raise ValueError("eigen_mixture weights required")
        if self.phi_kind == "sector_truncated" and not (0 <= self.s_window <= self.N // 2):
            raise ValueError("sector window must satisfy 0 ≤ s ≤ N/2")


def qubit_weights(n: int) -> np.ndarray:
    """Hamming weight of each computational basis state of n qubits."""
    return np.array([bin(i).count("1") for i in range(2**n)], dtype=float)


def total_charge(n: int) -> np.ndarray:
    return np.diag(qubit_weights(n)).astype(complex)


def hp_charges(k: int, N: int, l: int) -> ChargeSpec:
    dA, dB = 2**k, 2**N
    dAp, dBp = 2**l, 2 ** (N + k - l)
    lay_in = SystemLayout.of(("A", dA), ("B", dB))
    lay_out = SystemLayout.of(("Ap", dAp), ("Bp", dBp))
    return ChargeSpec(
        input_layout=lay_in,
        output_layout=lay_out,
        local_input={"A": total_charge(k), "B": total_charge(N)},
        local_output={"Ap": total_charge(l) if l else np.zeros((1, 1)),
                      "Bp": total_charge(N + k - l)},
    )


def _max_entangled(d: int) -> np.ndarray:
    return np.eye(d).reshape(-1) / np.sqrt(d)


def eigen_mixture_rho(k: int, mixture: Sequence[tuple[float, int]]) -> np.ndarray:
    """ρ_A = Σ_w p_w · (maximally mixed on the charge-w eigenspace)."""
    wts = qubit_weights(k)
    d = 2**k
    rho = np.zeros((d, d), dtype=complex)
    tot = 0.0
    for p, w in mixture:
        sel = wts == w
        if not sel.any():
            raise ValueError(f"no charge-{w} eigenspace for k={k}")
        rho[np.diag_indices(d)] += p * sel / sel.sum()
        tot += p
    if abs(tot - 1.0) > 1e-12:
        raise ValueError("mixture weights must sum to 1")
    return rho


def sector_truncated_phi(N: int, s: int) -> PureState:
    """Maximally entangled state over the B-charge window [s, N−s]."""
    wts = qubit_weights(N)
    sel = np.where((wts >= s) & (wts <= N - s))[0]
    d = 2**N
    r = len(sel)
    amps = np.zeros((d, r), dtype=complex)
    for j, b in enumerate(sel):
        amps[b, j] = 1.0 / np.sqrt(r)
    return PureState(amps.reshape(-1), SystemLayout.of(("B", d), ("RB", r)))


def build_hp_instance(config: HPConfig, rng=None, U: np.ndarray | None = None) -> ScramblingInstance:
    """Instance with a block-Haar scrambler over the total-charge sectors."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(
        config.seed if rng is None else rng)
    k, N, l = config.k, config.N, config.l
    dA, dB = 2**k, 2**N
    dAp, dBp = 2**l, 2 ** (N + k - l)

    if config.psi_kind == "max_entangled":
        psi = PureState(_max_entangled(dA), SystemLayout.of(("A", dA), ("RA", dA)))
    else:
        rho_A = eigen_mixture_rho(k, config.eigen_mixture)
        dm = DensityMatrix(rho_A, SystemLayout.of(("A", dA)))
        psi = purify(dm, ref_label="RA")

    if config.phi_kind == "max_entangled":
        phi = PureState(_max_entangled(dB), SystemLayout.of(("B", dB), ("RB", dB)))
    else:
        phi = sector_truncated_phi(N, config.s_window)

    if U is None:
        sectors = charge_sectors(total_charge(k + N))
        U = sample_block_haar(sectors, rng)
    return ScramblingInstance(psi=psi, phi=phi, U=U, out_dims=(dAp, dBp),
                              charges=hp_charges(k, N, l))


def _probe_states(config: HPConfig, rng: np.random.Generator, n_random: int = 16):
    """X_A eigenstates on supp(ρ_A) plus random pure support states."""
    k = config.k
    dA = 2**k
    wts = qubit_weights(k)
    if config.psi_kind == "eigen_mixture":
        support_w = {w for _, w in config.eigen_mixture}
        basis_idx = [i for i in range(dA) if wts[i] in support_w]
    else:
        basis_idx = list(range(dA))
    probes = []
    for i in basis_idx:
        v = np.zeros(dA, dtype=complex)
        v[i] = 1.0
        probes.append(v)
    dim_supp = len(basis_idx)
    for _ in range(n_random):
        c = rng.normal(size=dim_supp) + 1j * rng.normal(size=dim_supp)
        c /= np.linalg.norm(c)
        v = np.zeros(dA, dtype=complex)
        v[basis_idx] = c
        probes.append(v)
    return probes


def _x_Ap_operator(config: HPConfig) -> np.ndarray:
    k, N, l = config.k, config.N, config.l
    lay = SystemLayout.of(("Ap", 2**l if l else 1), ("Bp", 2 ** (N + k - l)))
    X = total_charge(l) if l else np.zeros((1, 1), dtype=complex)
    return embed_operator(X, lay, ["Ap"])


@dataclass
class EquidistributionRow:
    probe: int
    x_A: float
    x_Ap_mean: float
    predicted: float
    abs_dev: float
    normalized_dev: float | None
    std_err: float


@dataclass
class EquidistributionResult:
    epsilon_hat: float  # max normalized deviation, averaged over samples
    abs_dev_max: float
    x_B: float
    m_param: float
    gamma: float
    rows: list[EquidistributionRow] = field(default_factory=list)
    per_sample_eps: list[float] = field(default_factory=list)


def equidistribution_check(config: HPConfig, n_random_probes: int = 16) -> EquidistributionResult:
    """Measured equidistribution error ε̂ of x_{A'} against (x_A + x_B)·l/(N+k).

    Per sampled unitary the maximum normalized deviation
    2|x_{A'} − (x_A + x_B) l/(N+k)| / (Mγ) over the probe set is recorded;
    ε̂ is its average over samples.  When M = 0 only absolute deviations are
    reported.
    """
    rng = np.random.default_rng(config.seed)
    k, N, l = config.k, config.N, config.l
    gamma = 1.0 - l / (N + k)
    inst0 = build_hp_instance(config, rng=np.random.default_rng(config.seed))
    rho_B = inst0.rho_B().matrix
    x_B = float(np.trace(rho_B @ total_charge(N)).real)
    _, _, M = moments(inst0.rho_A(), total_charge(k))
    probes = _probe_states(config, rng, n_random_probes)
    X_Ap_full = _x_Ap_operator(config)
    X_A = total_charge(k)
    sectors = charge_sectors(total_charge(k + N))

    frac = l / (N + k)
    per_sample_eps = []
    abs_max = 0.0
    acc = np.zeros(len(probes))
    acc_sq = np.zeros(len(probes))
    x_A_list = [float(np.real(v.conj() @ X_A @ v)) for v in probes]
    for _ in range(config.samples):
        U = sample_block_haar(sectors, rng)
        Y = U.conj().T @ X_Ap_full @ U
        # T = Tr_B[(1 ⊗ ρ_B) Y]: probe expectations reduce to Tr[ρ T]
        T = np.einsum("aibj,ji->ab", Y.reshape(2**k, 2**N, 2**k, 2**N), rho_B)
        devs = []
        for idx, v in enumerate(probes):
            x_Ap = float(np.real(v.conj() @ T @ v))
            acc[idx] += x_Ap
            acc_sq[idx] += x_Ap * x_Ap
            dev = abs(x_Ap - (x_A_list[idx] + x_B) * frac)
            devs.append(dev)
            abs_max = max(abs_max, dev)
        if M > 1e-12 and gamma > 0:
            per_sample_eps.append(2.0 * max(devs) / (M * gamma))
    rows = []
    n = config.samples
    for idx, v in enumerate(probes):
        mean = acc[idx] / n
        var_hat = max(acc_sq[idx] / n - mean * mean, 0.0) * (n / max(n - 1, 1))
        se = float(np.sqrt(var_hat / n))
        pred = (x_A_list[idx] + x_B) * frac
        nd = 2.0 * abs(mean - pred) / (M * gamma) if (M > 1e-12 and gamma > 0) else None
        rows.append(EquidistributionRow(idx, x_A_list[idx], mean, pred, abs(mean - pred), nd, se))
    eps_hat = float(np.mean(per_sample_eps)) if per_sample_eps else float("nan")
    return EquidistributionResult(
        epsilon_hat=eps_hat,
        abs_dev_max=abs_max,
        x_B=x_B,
        m_param=M,
        gamma=gamma,
        rows=rows,
        per_sample_eps=per_sample_eps,
    )


@dataclass
class ConcentrationRow:
    t: float
    empirical: float
    bound: float
    slack: float
    ok: bool


@dataclass
class ConcentrationResult:
    rows: list[ConcentrationRow]
    mean_predicted: float
    samples: int
    deviations: list[float]


def concentration_sweep(config: HPConfig, t_grid: Sequence[float]) -> ConcentrationResult:
    """Empirical tail of |x_{A'} − mean| against the sector-concentration bound
    2 exp(−(C(N+k, s) − 2) t² / (48 l²)).

    Requires the sector-truncated φ so that supp(ρ ⊗ ρ_B) sits inside the
    total-charge window ℳ_s.
    """
    if config.phi_kind != "sector_truncated":
        raise ValueError("concentration sweep requires the sector-truncated φ")
    rng = np.random.default_rng(config.seed)
    k, N, l, s = config.k, config.N, config.l, config.s_window
    if comb(N + k, s) < 1:
        raise ValueError("empty sector window")
    inst0 = build_hp_instance(config, rng=np.random.default_rng(config.seed))
    rho_A = inst0.rho_A().matrix
    rho_B = inst0.rho_B().matrix
    x_A = float(np.trace(rho_A @ total_charge(k)).real)
    x_B = float(np.trace(rho_B @ total_charge(N)).real)
    mean_pred = (x_A + x_B) * l / (N + k)
    X_Ap_full = _x_Ap_operator(config)
    sectors = charge_sectors(total_charge(k + N))
    devs = []
    for _ in range(config.samples):
        U = sample_block_haar(sectors, rng)
        Y = U.conj().T @ X_Ap_full @ U
        T = np.einsum("aibj,ji->ab", Y.reshape(2**k, 2**N, 2**k, 2**N), rho_B)
        x_Ap = float(np.trace(rho_A @ T).real)
        devs.append(abs(x_Ap - mean_pred))
    devs_arr = np.asarray(devs)
    n = config.samples
    coeff = (comb(N + k, s) - 2) / (48.0 * l * l) if l else np.inf
    rows = []
    for t in t_grid:
        emp = float(np.mean(devs_arr > t))
        bound = float(min(1.0, 2.0 * np.exp(-coeff * t * t)))
        se = float(np.sqrt(emp * (1 - emp) / n)) + 1.0 / n
        ok = emp <= bound + 3.0 * se
        rows.append(ConcentrationRow(float(t), emp, bound, 3.0 * se, ok))
    return ConcentrationResult(rows, mean_pred, n, devs)


@dataclass
class FoggyRow:
    l: int
    seed: int
    epsilon_hat: float
    hp13_bound: float
    siq1_bound: float
    siq2_bound: float
    delta_upper: float
    gamma: float
    trivial: bool
    satisfied: bool
    control_delta: float | None = None
    mirror_reference: float | None = None


def foggy_mirror_experiment(
    config: HPConfig,
    l_values: Sequence[int] | None = None,
    n_instances: int = 3,
    eq_samples: int | None = None,
    control: bool = False,
    seesaw_restarts: int = 2,
) -> list[FoggyRow]:
    """Sweep the collected-radiation size l at fixed (k, N).

    Per instance: measured ε̂, the assembled lower bound (l-independent for
    l < N+k), instance-level SIQ1/SIQ2 bounds, and the seesaw upper bound on
    δ.  With `control=True` an unrestricted-Haar run is added per l along
    with the no-symmetry reference curve 2^{−(l−k)} (plot data only).
    """
    from .bounds import dynamical_fluctuation, evaluate_bound
    from .channels import optimize_recovery

    k, N = config.k, config.N
    if l_values is None:
        l_values = list(range(1, N + k))
    rows = []
    for l in l_values:
        cfg = HPConfig(k=k, N=N, l=l, s_window=config.s_window, seed=config.seed,
                       samples=eq_samples or max(20, config.samples // 5),
                       psi_kind=config.psi_kind, eigen_mixture=config.eigen_mixture,
                       phi_kind=config.phi_kind)
        eq = equidistribution_check(cfg)
        gamma = 1.0 - l / (N + k)
        for i in range(n_instances):
            seed_i = config.seed + 1000 * l + i
            inst = build_hp_instance(cfg, rng=np.random.default_rng(seed_i))
            rec = optimize_recovery(inst, mode="with_RB", seed=seed_i,
                                    n_restarts=seesaw_restarts)
            fl = dynamical_fluctuation(inst)
            siq1 = evaluate_bound("SIQ1", inst, fluct=fl, delta_up=rec.achieved_error)
            siq2 = evaluate_bound("SIQ2", inst, fluct=fl, delta_up=rec.achieved_error)
            reports = hp_bounds(k, N, l, eq.m_param, eq.epsilon_hat,
                                delta_up=rec.achieved_error)
            hp13 = reports[0]
            ctrl_delta = None
            mirror = None
            if control:
                U_free = haar_unitary(2 ** (k + N), np.random.default_rng(seed_i + 17))
                inst_free = build_hp_instance(cfg, rng=np.random.default_rng(seed_i),
                                              U=U_free)
                rec_free = optimize_recovery(inst_free, mode="with_RB", seed=seed_i,
                                             n_restarts=seesaw_restarts)
                ctrl_delta = rec_free.achieved_error
                mirror = float(2.0 ** (-(l - k)))
            rows.append(FoggyRow(
                l=l, seed=seed_i, epsilon_hat=eq.epsilon_hat,
                hp13_bound=float(hp13.lhs), siq1_bound=float(siq1.lhs),
                siq2_bound=float(siq2.lhs), delta_upper=rec.achieved_error,
                gamma=gamma, trivial=bool(hp13.terms.get("trivial_regime")),
                satisfied=bool(hp13.satisfied) if hp13.satisfied is not None else True,
                control_delta=ctrl_delta, mirror_reference=mirror,
            ))
    return rows
