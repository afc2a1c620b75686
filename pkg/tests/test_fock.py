import math

import numpy as np
import pytest

import linamp as L
from linamp.fock import _squeeze_slice


def test_laguerre_low_orders():
    assert L.laguerre(0, 3.7) == 1.0
    assert L.laguerre(1, 2.0) == -1.0
    # L2(x) = 1 - 2x + x^2/2, expanded by hand at x = 2
    assert L.laguerre(2, 2.0) == pytest.approx(1 - 4 + 2, abs=1e-14)


def test_laguerre_against_scipy():
    from scipy.special import eval_laguerre
    x = np.linspace(0.0, 30.0, 17)
    for n in (0, 1, 3, 7, 20, 50):
        ours = L.laguerre(n, x)
        ref = eval_laguerre(n, x)
        assert np.max(np.abs(ours - ref) / np.maximum(np.abs(ref), 1.0)) < 1e-10


def test_laguerre_domain_guard():
    with pytest.raises(ValueError):
        L.laguerre(-1, 0.0)
    with pytest.raises(ValueError):
        L.laguerre(201, 0.0)


def test_mode_ops_matrix_elements():
    a, adag, num = L.mode_ops(2)
    assert np.allclose(a.matrix, [[0, 1], [0, 0]])
    a3, _, _ = L.mode_ops(3)
    assert a3.matrix[1, 2] == pytest.approx(math.sqrt(2))
    comm = (a3 @ a3.dag() - a3.dag() @ a3).matrix
    assert np.allclose(np.diag(comm).real, [1, 1, -2])
    # truncation artifact confined to the top level
    dim = 17
    a, adag, _ = L.mode_ops(dim)
    comm = (a @ adag - adag @ a).matrix
    assert np.allclose(comm[: dim - 1, : dim - 1], np.eye(dim - 1))
    assert comm[dim - 1, dim - 1].real == pytest.approx(-(dim - 1))


def test_mode_ops_rejects_small_dim():
    with pytest.raises(ValueError):
        L.mode_ops(1)


def test_displacement_identity_and_overlap():
    d0 = L.displacement_matrix(0.0, 8)
    assert np.allclose(d0.matrix, np.eye(8))
    d = L.displacement_matrix(1.0, 40)
    # brute-force oracle: coherent-state amplitudes from the power series
    series = [math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(40)]
    assert d.matrix[0, 0].real == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert np.allclose(d.matrix[:, 0].real, series, atol=1e-12)


def test_displacement_unitary_on_interior():
    d = L.displacement_matrix(0.5j, 40)
    prod = d.dag().matrix @ d.matrix
    interior = 20
    assert np.max(np.abs(prod[:interior, :interior] - np.eye(interior))) < 1e-10


def test_displacement_support_warning():
    with pytest.warns(UserWarning):
        L.displacement_matrix(4.0, 8)


def test_displacement_matches_closed_form_elements():
    # independent route: expm of the generator vs the Laguerre closed form
    # used inside char_fn (via a pure state's characteristic function)
    beta = 0.7 - 0.4j
    d = L.displacement_matrix(beta, 50)
    rho = L.number_state(3, 50)
    assert L.char_fn(rho, L.SYMMETRIC, beta) == pytest.approx(
        np.trace(rho.matrix @ d.matrix), abs=1e-10)


def test_two_mode_squeeze_identity_at_r0():
    p = L.SqueezeParams.from_r(0.0)
    rho = L.coherent_state(0.4 + 0.2j, 20)
    out = L.two_mode_squeeze_apply(rho, L.AncillaState.vacuum(), p, dims=(20, 8))
    assert np.max(np.abs(out.matrix - rho.matrix)) < 1e-13


def test_two_mode_squeeze_vacuum_gain():
    p = L.SqueezeParams.from_gain(1.25)
    out = L.two_mode_squeeze_apply(L.vacuum_state(30), L.AncillaState.vacuum(), p, (30, 30))
    _, _, num = L.mode_ops(30)
    assert out.expect(num).real == pytest.approx(1.25**2 - 1, abs=1e-9)
    assert out.trace().real == pytest.approx(1.0, abs=1e-9)


def test_two_mode_squeeze_agrees_with_kraus_sum():
    p = L.SqueezeParams.from_gain(1.25)
    rho = L.coherent_state(0.5, 30)
    out = L.two_mode_squeeze_apply(rho, L.AncillaState.vacuum(), p, (30, 30))
    ks = L.squeeze_kraus_vacuum(p, n_max=29, dim=30)
    out2 = L.apply_kraus(ks, rho)
    assert np.max(np.abs(out.matrix - out2.matrix)) < 1e-12


def test_vacuum_vacuum_amplitude_is_inverse_gain():
    for g in (1.25, 2.0, 3.0):
        p = L.SqueezeParams.from_gain(g)
        x = _squeeze_slice(p, 0, 4, 10)
        assert x[0, 0, 0].real == pytest.approx(1.0 / g, abs=1e-12)


def test_two_mode_truncation_overflow_raises():
    p = L.SqueezeParams.from_gain(2.0)
    with pytest.raises(L.TruncationOverflowError):
        L.two_mode_squeeze_apply(L.vacuum_state(6), L.AncillaState.vacuum(), p, (6, 6))


def test_kraus_vacuum_a0_diagonal():
    p = L.SqueezeParams.from_gain(1.25)
    ks = L.squeeze_kraus_vacuum(p, n_max=3, dim=5)
    g = 1.25
    assert np.allclose(np.diag(ks.elements[0].matrix).real,
                       [1 / g ** (n + 1) for n in range(5)])


def test_kraus_vacuum_gain_one_is_identity():
    p = L.SqueezeParams.from_gain(1.0)
    ks = L.squeeze_kraus_vacuum(p, n_max=3, dim=6)
    assert np.allclose(ks.elements[0].matrix, np.eye(6))
    for e in ks.elements[1:]:
        assert np.max(np.abs(e.matrix)) == 0.0


def test_kraus_completeness_on_interior():
    # defect < 1e-8 on the first dim - n_max levels once n_max captures the
    # negative-binomial tail there; n_max=30 only covers a shallower interior
    # (see the decisions ledger)
    p = L.SqueezeParams.from_gain(1.25)
    ks = L.squeeze_kraus_vacuum(p, n_max=52, dim=60)
    assert ks.completeness_defect(interior=60 - 52) < 1e-8


def test_kraus_general_matches_vacuum_case():
    p = L.SqueezeParams.from_gain(1.25)
    k1 = L.squeeze_kraus_vacuum(p, n_max=10, dim=24)
    k2 = L.squeeze_kraus_general(p, L.AncillaState.vacuum(), n_max=10, dim=24)
    assert k2.completely_positive
    for e1, e2 in zip(k1.elements, k2.elements):
        assert np.max(np.abs(e1.matrix - e2.matrix)) < 1e-12


def test_kraus_general_excited_ancilla_moment():
    # sigma = |1><1|, coherent input 0.5: <a'a>_out = g^2|b|^2 + (g^2-1)<bb'>
    g = 1.25
    p = L.SqueezeParams.from_gain(g)
    ks = L.squeeze_kraus_general(p, L.AncillaState.number(1), n_max=39, dim=40)
    out = L.apply_kraus(ks, L.coherent_state(0.5, 40))
    _, _, num = L.mode_ops(40)
    expected = g**2 * 0.25 + (g**2 - 1) * 2.0
    assert out.expect(num).real == pytest.approx(expected, rel=1e-9)


def test_kraus_general_trace_preserving_for_lambda_family():
    p = L.SqueezeParams.from_gain(1.25)
    sigma = L.lambda_family(0.25)
    ks = L.squeeze_kraus_general(p, sigma, n_max=39, dim=40)
    out = L.apply_kraus(ks, L.coherent_state(0.3, 40))
    assert out.trace().real == pytest.approx(1.0, abs=1e-8)


def test_kraus_general_flags_negative_weights():
    p = L.SqueezeParams.from_gain(1.25)
    ks = L.squeeze_kraus_general(p, L.lambda_family(-0.5), n_max=29, dim=30)
    assert not ks.completely_positive
    assert -1.0 in ks.weights
    # the signed sum still preserves trace
    out = L.apply_kraus(ks, L.vacuum_state(30))
    assert out.trace().real == pytest.approx(1.0, abs=1e-8)


def test_gain_law_coherent_inputs():
    g = 1.25
    spec = L.AmplifierSpec(g=g, sigma=L.lambda_family(0.25))
    a, _, _ = L.mode_ops(60)
    for beta in (0.4, 0.3 + 0.2j, -0.5j):
        rho = L.coherent_state(beta, 60)
        out = L.parametric_apply(rho, spec, dims=(60, 10))
        assert abs(out.expect(a) - g * beta) / abs(g * beta) < 1e-6


def test_commutator_preservation_two_mode():
    # a_out = g a - sqrt(g^2-1) b' on the doubled space keeps [a, a'] = 1
    # on the interior
    g = 1.5
    da, db = 12, 12
    a, adag, _ = L.mode_ops(da)
    b, bdag, _ = L.mode_ops(db)
    ia, ib = np.eye(da), np.eye(db)
    A = np.kron(a.matrix, ib)
    Bd = np.kron(ia, bdag.matrix)
    a_out = g * A - math.sqrt(g**2 - 1) * Bd
    comm = a_out @ a_out.conj().T - a_out.conj().T @ a_out
    # interior = both modes away from the top level
    sel = np.array([i * db + j for i in range(da - 1) for j in range(db - 1)])
    assert np.max(np.abs(comm[np.ix_(sel, sel)] - np.eye(sel.size))) < 1e-12


def test_second_moment_law():
    g = 1.25
    for sigma, a1 in ((L.AncillaState.vacuum(), 0.5),
                      (L.lambda_family(0.25), 1.75),
                      (L.AncillaState.thermal(1.0, 60), 1.5)):
        spec = L.AmplifierSpec(g=g, sigma=sigma)
        for rho, var_in in ((L.coherent_state(0.5, 70), 0.5),
                            (L.thermal_state(0.5, 70), 1.0)):
            out = L.parametric_apply(rho, spec, dims=(70, 60))
            got = L.symmetric_noise_moment(out, 1)
            expect = g**2 * var_in + (g**2 - 1) * a1
            assert got == pytest.approx(expect, rel=1e-6)


def test_ancilla_state_validation():
    with pytest.raises(ValueError):
        L.AncillaState(weights=(1,), matrix=np.eye(2))
    with pytest.raises(ValueError):
        L.AncillaState.from_matrix(np.array([[0, 1], [0, 0]]))
    sig = L.AncillaState.thermal(1.0, 60)
    assert sig.trace() == pytest.approx(1.0, abs=1e-8)
    assert sig.mean_quanta() == pytest.approx(1.0, abs=1e-6)
