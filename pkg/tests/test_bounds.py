import numpy as np
import pytest

from symrec.bounds import (
    Decomposition,
    delta_j,
    delta_plus,
    dynamical_fluctuation,
    eastin_knill_bound,
    effective_generator,
    evaluate_bound,
    evaluate_matrix_bound,
    hp_bounds,
    operator_spread,
)
from symrec.channels import PureState, ScramblingInstance, optimize_recovery
from symrec.hp import HPConfig, build_hp_instance, total_charge
from symrec.showcase import build_alleviation_instance
from symrec.symmetry import ChargeSpec, ViolationReport, conservation_check
from symrec.tensor import SystemLayout

rng = np.random.default_rng(23)

Z01 = np.diag([0.0, 1.0]).astype(complex)


def rand_instance(seed, k=1, N=1, l=1):
    r = np.random.default_rng(seed)
    cfg = HPConfig(k=k, N=N, l=l, seed=seed, samples=1)
    inst = build_hp_instance(cfg, rng=r)
    dA, dB = 2**k, 2**N
    v = r.normal(size=dA * dA) + 1j * r.normal(size=dA * dA)
    w = r.normal(size=dB * dB) + 1j * r.normal(size=dB * dB)
    return ScramblingInstance(
        psi=PureState(v / np.linalg.norm(v), inst.psi.layout),
        phi=PureState(w / np.linalg.norm(w), inst.phi.layout),
        U=inst.U, out_dims=inst.out_dims, charges=inst.charges,
    )


def eigen_decomposition(inst):
    w, V = np.linalg.eigh(inst.rho_A().matrix)
    terms = tuple((float(p), np.outer(V[:, i], V[:, i].conj()))
                  for i, p in enumerate(w) if p > 1e-12)
    tot = sum(p for p, _ in terms)
    return Decomposition(tuple((p / tot, r) for p, r in terms))


# ------------------------------------------------------------------- delta_j


def test_delta_j_of_rho_A_is_zero():
    inst = rand_instance(0)
    assert abs(delta_j(inst, inst.rho_A().matrix)) < 1e-12


def test_delta_j_alleviation():
    inst, _ = build_alleviation_instance(1)
    assert delta_j(inst, np.diag([1.0, 0.0])) == pytest.approx(-1.0, abs=1e-10)
    assert delta_j(inst, np.diag([0.0, 1.0])) == pytest.approx(1.0, abs=1e-10)


def test_delta_j_equals_Bprime_shift_under_conservation():
    # Δ_j = <X_B'>_{ρ^f_{j,B'}} − <X_B'>_{ρ^f_{B'}} when U conserves X
    from symrec.channels import final_Bp_state

    inst = rand_instance(3, k=1, N=2, l=1)
    X_Bp = inst.charges.local_output["Bp"]
    center = final_Bp_state(inst, inst.rho_A().matrix)
    for _ in range(5):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        rho_j = np.outer(v, v.conj())
        lhs = delta_j(inst, rho_j)
        fin = final_Bp_state(inst, rho_j)
        rhs = np.trace(X_Bp @ (fin - center)).real
        assert abs(lhs - rhs) < 1e-10


# ------------------------------------------------------------ operator_spread


def test_operator_spread_examples():
    assert operator_spread(Z01) == pytest.approx(1.0)
    assert operator_spread(np.eye(3)) == pytest.approx(0.0)
    for k in (2, 3, 4):
        assert operator_spread(total_charge(k)) == pytest.approx(float(k), abs=1e-12)


# ----------------------------------------------------- dynamical_fluctuation


def test_fluctuation_alleviation_paper_values():
    inst, _ = build_alleviation_instance(1)
    fl = dynamical_fluctuation(inst, strategy="eigen")
    assert fl.a_single == pytest.approx(0.5, abs=1e-12)
    assert fl.a_sum == pytest.approx(1.0, abs=1e-12)
    assert fl.delta_plus == pytest.approx(1.0, abs=1e-12)
    # the eigen witness is the {|0><0|, |1><1|} decomposition with Δ = ∓1
    wit = fl.witnesses["eigen"]
    assert len(wit.terms) == 2
    assert sorted(np.round(fl.deltas, 10)) == [-1.0, 1.0]
    assert fl.a_two == pytest.approx(1.0, abs=1e-9)


def test_fluctuation_charge_generated_unitary_is_zero():
    # U = e^{iθX_total} maps every charge eigenstate to itself: Δ_j ≡ 0
    cfg = HPConfig(k=1, N=1, l=1, seed=0, samples=1)
    X_tot = total_charge(2)
    w, V = np.linalg.eigh(X_tot)
    U = (V * np.exp(1j * 0.9 * w)) @ V.conj().T
    inst = build_hp_instance(cfg, U=U)
    fl = dynamical_fluctuation(inst)
    assert fl.a_single < 1e-10
    assert fl.a_sum < 1e-10
    assert fl.a_two < 1e-9
    assert fl.delta_max < 1e-9


def test_fluctuation_closed_form_dominates_random_search():
    # brute-force random decompositions never exceed the closed forms,
    # and the shipped witnesses attain them
    for seed in range(4):
        inst = rand_instance(seed, k=1, N=2, l=1)
        fl = dynamical_fluctuation(inst, strategy="random_ensembles", seed=seed)
        G = effective_generator(inst)
        rho_A = inst.rho_A().matrix
        g0 = np.trace(rho_A @ G).real
        r = np.random.default_rng(seed)
        for _ in range(300):
            # random two-outcome POVM split of ρ_A
            B = r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2))
            Y = B @ B.conj().T
            Y = Y / np.linalg.eigvalsh(Y).max()
            from symrec.tensor import psd_sqrt

            sr = psd_sqrt(rho_A)
            W1 = sr @ Y @ sr
            W2 = rho_A - W1
            p1 = np.trace(W1).real
            p2 = np.trace(W2).real
            s = 0.0
            mx = 0.0
            for W, p in ((W1, p1), (W2, p2)):
                if p < 1e-12:
                    continue
                dj = np.trace(G @ W).real / p - g0
                s += p * abs(dj)
                mx = max(mx, p * abs(dj))
                assert abs(dj) <= fl.delta_max + 1e-9
            assert mx <= fl.a_single + 1e-9
            assert s <= fl.a_sum + 1e-9
        # witness attainment
        if "sign_split" in fl.witnesses:
            ds = [delta_j(inst, m) for _, m in fl.witnesses["sign_split"].terms]
            ps = [p for p, _ in fl.witnesses["sign_split"].terms]
            assert sum(p * abs(d) for p, d in zip(ps, ds)) >= fl.a_sum - 1e-8


def test_fluctuation_two_term_witness_attains():
    for seed in range(4):
        inst = rand_instance(seed + 10, k=1, N=2, l=2)
        fl = dynamical_fluctuation(inst, strategy="two_term_search", seed=seed)
        wit = fl.witnesses.get("two_term")
        if wit is None:
            assert fl.a_two < 1e-9
            continue
        wit.check_against(inst.rho_A().matrix)
        ds = [delta_j(inst, m) for _, m in wit.terms]
        attained = 0.5 * (abs(ds[0]) + abs(ds[1]))
        assert attained <= fl.a_two + 1e-9
        assert attained >= fl.a_two - 1e-6


def test_fluctuation_eigen_requires_commuting():
    inst = rand_instance(1)  # random ψ makes [ρ_A, X_A] ≠ 0 almost surely
    with pytest.raises(ValueError):
        dynamical_fluctuation(inst, strategy="eigen")


def test_fluctuation_report_invariants():
    for seed in range(6):
        inst = rand_instance(seed, k=2, N=1, l=1)
        dec = eigen_decomposition(inst)
        fl = dynamical_fluctuation(inst, decomposition=dec)
        assert fl.a_single <= fl.a_sum + 1e-9
        assert fl.a_two <= fl.a_sum + 1e-9
        assert fl.a_var is not None
        assert all(abs(d) <= fl.delta_max + 1e-9 for d in fl.deltas)
        dp = delta_plus(inst.charges)
        assert fl.delta_plus == pytest.approx(dp)


# -------------------------------------------------------------- evaluate_bound


def test_siq1_zero_coherence_instance():
    # φ an X_B eigenstate → ℱ = 0 and the bound is 𝒜/(8Δ₊)
    psi = PureState(np.eye(2).reshape(-1) / np.sqrt(2), SystemLayout.of(("A", 2), ("RA", 2)))
    phi = PureState(np.array([0, 1, 0, 0.0]), SystemLayout.of(("B", 2), ("RB", 2)))
    X_tot = total_charge(2)
    w, V = np.linalg.eigh(X_tot)
    SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)
    lay_in = SystemLayout.of(("A", 2), ("B", 2))
    lay_out = SystemLayout.of(("Ap", 2), ("Bp", 2))
    charges = ChargeSpec(lay_in, lay_out, {"A": Z01, "B": Z01}, {"Ap": Z01, "Bp": Z01})
    inst = ScramblingInstance(psi=psi, phi=phi, U=SWAP, out_dims=(2, 2), charges=charges)
    fl = dynamical_fluctuation(inst)
    rep = evaluate_bound("SIQ1", inst, fluct=fl)
    assert rep.terms["f_initial"] == pytest.approx(0.0, abs=1e-9)
    assert float(rep.lhs) == pytest.approx(fl.a_single / (8 * fl.delta_plus), abs=1e-10)
    assert fl.a_single > 0.1  # SWAP moves charge: recovery error bounded away from 0


def test_siq1_alleviation_value():
    inst, _ = build_alleviation_instance(1)
    rep = evaluate_bound("SIQ1", inst, delta_up=1 / np.sqrt(3))
    assert float(rep.lhs) == pytest.approx(0.5 / (2 * (np.sqrt(8 / 3) + 4)), abs=1e-9)
    assert float(rep.lhs) == pytest.approx(0.0444, abs=1e-4)
    assert rep.satisfied


def test_siqv1_with_scalar_shift_matches_siq1():
    # Z = μ·1 has zero spread: the violated-symmetry report reduces to SIQ1
    inst = rand_instance(4, k=1, N=1, l=1)
    shifted = ChargeSpec(
        inst.charges.input_layout, inst.charges.output_layout,
        dict(inst.charges.local_input),
        {"Ap": inst.charges.local_output["Ap"] + 0.3 * np.eye(2),
         "Bp": inst.charges.local_output["Bp"]},
    )
    inst2 = ScramblingInstance(psi=inst.psi, phi=inst.phi, U=inst.U,
                               out_dims=inst.out_dims, charges=shifted)
    viol = conservation_check(inst2.U, shifted)
    assert viol.spread_DZ < 1e-10
    r_v = evaluate_bound("SIQV1", inst2, violation=viol)
    r_1 = evaluate_bound("SIQ1", inst2)
    assert float(r_v.lhs) == pytest.approx(float(r_1.lhs), abs=1e-10)


def test_monotone_weakening_in_coherence():
    # replacing ℱ by any larger value weakens the SIQ1 bound
    inst = rand_instance(5)
    rep = evaluate_bound("SIQ1", inst)
    A = rep.terms["a_single"]
    dp = rep.terms["delta_plus"]
    F = rep.terms["f_initial"]
    vals = [A / (2 * (np.sqrt(F + extra) + 4 * dp)) for extra in (0.0, 0.5, 2.0, 10.0)]
    assert all(b < a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert float(rep.lhs) == pytest.approx(vals[0], abs=1e-12)


def test_rsiq1_vs_siq1_factor_two():
    # from 𝒜₂ ≤ 𝒜_sum: the two-term bound is at most twice the summed-form SIQ1
    for seed in range(5):
        inst = rand_instance(seed, k=1, N=2, l=1)
        fl = dynamical_fluctuation(inst)
        assert fl.a_two <= fl.a_sum + 1e-9
        r1 = evaluate_bound("SIQ1", inst, fluct=fl, a_reading="sum")
        r2 = evaluate_bound("RSIQ1", inst, fluct=fl)
        assert float(r2.lhs) <= 2 * float(r1.lhs) + 1e-9


def test_vsiq_requires_decomposition():
    inst = rand_instance(6)
    with pytest.raises(ValueError):
        evaluate_bound("VSIQ1", inst)


def test_bounds_soundness_small_sweep():
    for seed in range(8):
        inst = rand_instance(seed, k=1, N=2, l=1)
        rec = optimize_recovery(inst, mode="with_RB", seed=seed)
        rec_n = optimize_recovery(inst, mode="without_RB", seed=seed)
        dec = eigen_decomposition(inst)
        fl = dynamical_fluctuation(inst)
        for kind in ("SIQ1", "SIQ2", "SIQ1P", "RSIQ1", "RSIQ2", "VSIQ1", "VSIQ2"):
            rep = evaluate_bound(kind, inst, decomposition=dec, fluct=fl,
                                 delta_up=rec.achieved_error,
                                 delta_up_no_rb=rec_n.achieved_error)
            assert rep.satisfied, f"{kind} violated at seed {seed}"


# --------------------------------------------------------------- matrix bound


def two_generator_instance(seed):
    r = np.random.default_rng(seed)
    singlet = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    P_s = np.outer(singlet, singlet.conj())
    th_t, th_s = r.uniform(0, 2 * np.pi, size=2)
    U = np.exp(1j * th_t) * (np.eye(4) - P_s) + np.exp(1j * th_s) * P_s
    v = r.normal(size=4) + 1j * r.normal(size=4)
    w = r.normal(size=4) + 1j * r.normal(size=4)
    psi = PureState(v / np.linalg.norm(v), SystemLayout.of(("A", 2), ("RA", 2)))
    phi = PureState(w / np.linalg.norm(w), SystemLayout.of(("B", 2), ("RB", 2)))
    sz = np.diag([1.0, -1.0]).astype(complex) / 2
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
    lay_in = SystemLayout.of(("A", 2), ("B", 2))
    lay_out = SystemLayout.of(("Ap", 2), ("Bp", 2))

    def spec(X):
        return ChargeSpec(lay_in, lay_out, {"A": X, "B": X}, {"Ap": X, "Bp": X})

    inst = ScramblingInstance(psi=psi, phi=phi, U=U, out_dims=(2, 2), charges=spec(sz))
    return inst, [spec(sz), spec(sx)]


def test_matrix_bound_single_generator_reduces_to_scalar():
    inst, gens = two_generator_instance(0)
    rec = optimize_recovery(inst, mode="with_RB", seed=0)
    dec = eigen_decomposition(inst)
    for kind, scalar_kind in (("MSIQ1", "VSIQ1"), ("MSIQ2", "VSIQ2")):
        mrep = evaluate_matrix_bound(kind, inst, gens[:1], dec, rec.achieved_error)
        srep = evaluate_bound(scalar_kind, inst, decomposition=dec,
                              delta_up=rec.achieved_error)
        assert np.asarray(mrep.lhs).shape == (1, 1)
        assert float(np.asarray(mrep.lhs)[0, 0]) == pytest.approx(float(srep.lhs), abs=1e-10)
        assert float(np.asarray(mrep.rhs)[0, 0]) == pytest.approx(float(srep.rhs), abs=1e-10)


def test_matrix_bound_commuting_generators_trivial():
    # generators commuting with U and the states: Â_V = 0, PSD trivially
    cfg = HPConfig(k=1, N=1, l=1, seed=0, samples=1)
    X_tot = total_charge(2)
    w, V = np.linalg.eigh(X_tot)
    U = (V * np.exp(1j * 0.5 * w)) @ V.conj().T
    inst = build_hp_instance(cfg, U=U)
    gens = [inst.charges]
    dec = eigen_decomposition(inst)
    rep = evaluate_matrix_bound("MSIQ1", inst, gens, dec, delta_up=0.5)
    assert np.allclose(np.asarray(rep.terms["a_var_matrix"]), 0.0, atol=1e-12)
    assert rep.satisfied


def test_matrix_bound_psd_sweep():
    for seed in range(10):
        inst, gens = two_generator_instance(seed)
        rec = optimize_recovery(inst, mode="with_RB", seed=seed)
        dec = eigen_decomposition(inst)
        for kind in ("MSIQ1", "MSIQ2"):
            rep = evaluate_matrix_bound(kind, inst, gens, dec, rec.achieved_error)
            assert rep.satisfied, f"{kind} PSD margin {rep.terms['psd_margin']} at {seed}"


def test_matrix_bound_rejects_nonconserving_generator():
    inst, gens = two_generator_instance(1)
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
    bad = ChargeSpec(gens[0].input_layout, gens[0].output_layout,
                     {"A": sx, "B": 2 * sx}, {"Ap": sx, "Bp": 2 * sx})
    with pytest.raises(ValueError):
        evaluate_matrix_bound("MSIQ1", inst, [bad], eigen_decomposition(inst), 0.5)


# --------------------------------------------------------------- Eastin-Knill


def test_eastin_knill_values():
    b = eastin_knill_bound(1.0, 1.0, 3)
    assert b.eq17 == pytest.approx(1 / 13, abs=1e-12)
    assert b.variant_half == pytest.approx(1 / 7, abs=1e-12)


def test_eastin_knill_limits():
    assert eastin_knill_bound(1e-9, 1.0, 3).eq17 < 1e-9
    b = eastin_knill_bound(1.0, 1.0, 100)
    asym = 1.0 / (4 * 100)
    assert abs(b.eq17 - asym) / asym < 0.01
    with pytest.raises(ValueError):
        eastin_knill_bound(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        eastin_knill_bound(1.0, 1.0, 0)


def test_eastin_knill_monotonicity():
    base = eastin_knill_bound(1.0, 1.0, 3).eq17
    assert eastin_knill_bound(1.0, 1.0, 4).eq17 < base
    assert eastin_knill_bound(2.0, 1.0, 3).eq17 > base


# ------------------------------------------------------------------ hp_bounds


def test_hp_bounds_worked_example():
    reports = hp_bounds(k=1, N=3, l=2, M=0.5, epsilon=0.0)
    hp13 = next(r for r in reports if r.kind == "HP13")
    assert float(hp13.lhs) == pytest.approx(0.05, abs=1e-12)
    hp14 = next(r for r in reports if r.kind == "HP14")
    assert float(hp14.lhs) == pytest.approx(float(hp13.lhs), abs=1e-12)


def test_hp_bounds_gamma_zero_collapse():
    reports = hp_bounds(k=1, N=3, l=4, M=0.5, epsilon=0.0, f_initial=1.0)
    for r in reports:
        assert r.terms["trivial_regime"]
        assert float(r.lhs) == 0.0
    assert reports[0].terms["a_lower_term"] == pytest.approx(0.0)


def test_hp_bounds_hp16_value():
    f = 4.0 * 0.75  # some measured ℱ
    rep = next(r for r in hp_bounds(1, 3, 2, 0.5, 0.1, f_initial=f) if r.kind == "HP16")
    gamma = 1 - 2 / 4
    want = (0.9 / 1.1) * 0.5 * gamma / (2 * (np.sqrt(f) + 2 * (1 + 2)))
    assert float(rep.lhs) == pytest.approx(want, abs=1e-12)


def test_hp_bounds_rejects_oversized_l():
    with pytest.raises(ValueError):
        hp_bounds(1, 1, 3, 0.5, 0.0)


def test_f_terms_match_qfi_route():
    # ℱ via 4V equals the general QFI of the pure global state, and ℱ_f is
    # purification independent (two distinct purifications agree)
    from symrec.bounds import _f_final, _f_initial
    from symrec.channels import scramble
    from symrec.states import purify, qfi
    from symrec.tensor import SystemLayout

    inst = rand_instance(2, k=1, N=2, l=1)
    X_B = inst.charges.local_input["B"]
    full = np.kron(X_B, np.eye(inst.d_RB))
    assert _f_initial(inst) == pytest.approx(qfi(inst.phi.to_density(), full), abs=1e-8)

    X_Bp = inst.charges.local_output["Bp"]
    rho_f = scramble(inst).rho_f_Bp
    f_f, _ = _f_final(inst)
    pur1 = purify(rho_f)
    r = pur1.layout.dims[-1]
    q1 = qfi(pur1.to_density(), np.kron(X_Bp, np.eye(r)))
    # a second, rotated purification
    rng2 = np.random.default_rng(0)
    G = rng2.normal(size=(r, r)) + 1j * rng2.normal(size=(r, r))
    Q, _ = np.linalg.qr(G)
    amps2 = (pur1.amplitudes.reshape(-1, r) @ Q).reshape(-1)
    from symrec.states import DensityMatrix, PureState

    pur2 = PureState(amps2, pur1.layout)
    q2 = qfi(pur2.to_density(), np.kron(X_Bp, np.eye(r)))
    assert f_f == pytest.approx(q1, abs=1e-8)
    assert f_f == pytest.approx(q2, abs=1e-8)
