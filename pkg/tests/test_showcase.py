import numpy as np
import pytest

from symrec.bounds import dynamical_fluctuation, evaluate_bound
from symrec.showcase import (
    _analytic_error_dense,
    _analytic_error_sparse,
    alleviation_recovery,
    alleviation_unitary,
    build_alleviation_instance,
    verify_alleviation,
)
from symrec.symmetry import conservation_check
from symrec.tensor import assert_unitary


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_construction_conserves(M):
    inst, V = build_alleviation_instance(M)
    assert_unitary(inst.U)
    assert_unitary(V)
    assert conservation_check(inst.U, inst.charges).spread_DZ <= 1e-10


def test_induced_channel_is_bit_flip():
    inst, _ = build_alleviation_instance(1)
    ch = inst.channel()
    out = ch.apply_matrix(np.diag([1.0, 0.0]).astype(complex))
    assert np.allclose(out, np.diag([0.0, 1.0]), atol=1e-10)
    out = ch.apply_matrix(np.diag([0.0, 1.0]).astype(complex))
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-10)
    # coherences are destroyed, not flipped
    out = ch.apply_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
    assert np.abs(out).max() < 1e-10


@pytest.mark.parametrize("M", [1, 2, 5])
def test_analytic_error_closed_form(M):
    err = _analytic_error_dense(M)
    assert err == pytest.approx(1 / np.sqrt(2 * M + 1), abs=1e-9)


def test_sparse_matches_dense():
    for M in (1, 4, 8, 16):
        assert abs(_analytic_error_dense(M) - _analytic_error_sparse(M)) < 1e-9


def test_report_golden_values_m1():
    rep = verify_alleviation(1)
    assert rep.analytic_error == pytest.approx(1 / np.sqrt(3), abs=1e-9)
    assert rep.a_single == pytest.approx(0.5, abs=1e-12)
    assert rep.a_sum == pytest.approx(1.0, abs=1e-12)
    assert rep.delta_plus == pytest.approx(1.0, abs=1e-12)
    assert rep.f_initial == pytest.approx(8 / 3, abs=1e-9)
    assert rep.siq1_lower == pytest.approx(0.5 / (2 * (np.sqrt(8 / 3) + 4)), abs=1e-9)
    assert rep.spread_DZ <= 1e-10
    assert rep.bitflip_check <= 1e-10


def test_error_thresholds_vs_coherence():
    # M = 8 still exceeds 𝒜/8 = 1/16; the closed-form regime M = 200 is below
    rep8 = verify_alleviation(8)
    assert rep8.analytic_error == pytest.approx(1 / np.sqrt(17), abs=1e-9)
    assert not rep8.coherence_alleviated
    rep200 = verify_alleviation(200)
    assert rep200.analytic_error == pytest.approx(1 / np.sqrt(401), abs=1e-9)
    assert rep200.analytic_error < 1 / 16
    assert rep200.coherence_alleviated


def test_seesaw_beats_analytic_recovery():
    rep = verify_alleviation(1, seesaw=True)
    assert rep.seesaw_error is not None
    assert rep.seesaw_error <= rep.analytic_error + 1e-6


@pytest.mark.parametrize("M", [1, 2, 4])
def test_siq1_below_analytic_error(M):
    inst, _ = build_alleviation_instance(M)
    err = _analytic_error_dense(M)
    rep = evaluate_bound("SIQ1", inst, delta_up=err)
    assert rep.satisfied


def test_fluctuation_all_m():
    for M in (1, 2, 3):
        inst, _ = build_alleviation_instance(M)
        fl = dynamical_fluctuation(inst, strategy="eigen")
        assert fl.a_single == pytest.approx(0.5, abs=1e-12)
        assert fl.delta_plus == pytest.approx(1.0, abs=1e-12)


def test_recovery_permutations_are_inverse_shifts():
    # U then V restores A up to the edge wrap terms
    M = 1
    U = alleviation_unitary(M)
    V = alleviation_recovery(M)
    dB = 6 * M + 1
    # on the bulk subspace (|a, k⟩ with |k| ≤ 2M−1) V∘U acts as identity on A
    for k in range(-M, M + 1):
        for a in (0, 1):
            idx = a * dB + (k + 3 * M)
            vec = np.zeros(2 * dB)
            vec[idx] = 1.0
            out = V @ (U @ vec)
            nz = np.flatnonzero(np.abs(out) > 1e-12)
            assert len(nz) == 1
            assert nz[0] // dB == a  # the A label is restored
