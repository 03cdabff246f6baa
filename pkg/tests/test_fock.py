import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvdvrate import fock
from cvdvrate import gaussian as G

import oracles as O

FAST = settings(max_examples=25, deadline=None)


def test_tmsv_vacuum_limit():
    s = fock.make_tmsv(0.0, 5)
    assert s.coeffs[0, 0] == pytest.approx(1.0)
    assert s.trace() == pytest.approx(1.0)


def test_tmsv_mean_photons():
    assert fock.photon_number(fock.make_tmsv(0.5, 15), 0) == pytest.approx(1 / 3, abs=1e-6)
    n = fock.photon_number(fock.make_tmsv(0.9, 40), 1)
    assert n == pytest.approx(4.263, abs=0.01)


def test_tmsv_truncation_flagged():
    with pytest.warns(fock.TruncationWarning):
        s = fock.make_tmsv(0.9, 10)
    assert s.truncation_warning
    assert s.norm_retained == pytest.approx(1 - 0.81 ** 11)
    assert not fock.make_tmsv(0.5, 15).truncation_warning


def test_tmsv_matches_closed_form_coefficients():
    s = fock.make_tmsv(0.5, 6)
    t = s.tensor
    norm = sum(0.25 ** k for k in range(7))
    for n in range(7):
        for m in range(7):
            assert t[n, n, m, m] == pytest.approx(0.5 ** (n + m) / norm)


def test_adequate_cutoff():
    assert fock.adequate_cutoff(0.5) == 17
    assert fock.adequate_cutoff(0.9) == 129
    assert fock.default_cutoff(0.5) == 15
    assert fock.default_cutoff(0.9) == 40


def test_loss_matches_kraus_oracle():
    s = fock.make_tmsv(0.5, 8)
    got = fock.apply_loss(s, 1, 0.3)
    dims = s.dims
    ref = O.apply_kraus(s.coeffs, O.loss_kraus(dims[1], 0.3), 1, dims)
    assert np.max(np.abs(got.coeffs - ref)) < 1e-13


def test_amplifier_matches_kraus_oracle():
    s = fock.fock_state([0, 1], [2, 14])
    got = fock.apply_amplifier(s, 1, 1.4)
    ref = O.apply_kraus(s.coeffs, O.amplifier_kraus(15, 1.4), 1, s.dims)
    ref /= np.trace(ref).real
    assert np.max(np.abs(got.coeffs - ref)) < 1e-12


def test_loss_covariance_cross_oracle():
    s = fock.apply_loss(fock.make_tmsv(0.5, 30), 1, 0.5)
    _, cov = fock.quadrature_moments(s)
    ref = G.loss_map(G.tmsv_covariance(0.5), 1, 0.5)
    assert np.max(np.abs(cov - ref.cov)) < 1e-8
    assert cov[2, 2] == pytest.approx(4 / 3)


def test_loss_composes():
    s = fock.make_tmsv(0.5, 12)
    a = fock.apply_loss(fock.apply_loss(s, 1, 0.6), 1, 0.5)
    b = fock.apply_loss(s, 1, 0.3)
    assert fock.trace_distance(a, b) < 1e-12


def test_additive_noise_moments():
    s = fock.make_tmsv(0.3, 30)
    out = fock.apply_additive_noise(s, 1, 0.8)
    _, cov = fock.quadrature_moments(out)
    _, cov0 = fock.quadrature_moments(s)
    expect = cov0.copy()
    expect[2:, 2:] += 0.8 * np.eye(2)
    assert np.max(np.abs(cov - expect)) < 1e-7


def test_gaussian_channel_rejects_unphysical():
    s = fock.make_tmsv(0.3, 5)
    with pytest.raises(ValueError):
        fock.apply_gaussian_channel(s, 1, 0.5, 0.1)


def test_nla_examples():
    one = fock.fock_state([1], [3])
    out = fock.apply_nla(one, 0, 2.0, 1)
    assert out.weight == pytest.approx(1.0)
    assert out.coeffs[1, 1] == pytest.approx(1.0)
    vac = fock.apply_nla(fock.fock_state([0], [3]), 0, 2.0, 1)
    assert vac.weight == pytest.approx(0.25)
    s = fock.make_tmsv(0.5, 6)
    same = fock.apply_nla(s, 1, 1.0, 3)
    assert same is s


def test_nla_rejects_attenuation():
    with pytest.raises(ValueError):
        fock.apply_nla(fock.fock_state([0], [3]), 0, 0.5, 1)


def test_nla_zero_loss_branch_parameter():
    # no-loss Kraus branch then NLA: amplitude ratio between |n,n> terms is g chi sqrt(eta)
    chi, eta, g, n_max = 0.5, 0.1, 2.5, 4
    s = fock.make_tmsv(chi, 25)
    a0 = O.loss_kraus(26, eta)[0]
    branch = fock.apply_mode_operator(s, 1, a0)
    out = fock.apply_nla(branch, 1, g, n_max)
    t = out.tensor
    for n in range(n_max):
        ratio = math.sqrt(t[n + 1, n + 1, n + 1, n + 1].real / t[n, n, n, n].real)
        assert ratio == pytest.approx(g * chi * math.sqrt(eta), rel=1e-10)


def test_project_vacuum_on_tmsv():
    s = fock.make_tmsv(0.5, 30)
    out = fock.project_fock(s, 0, 0)
    assert out.weight == pytest.approx(0.75, abs=1e-12)
    assert out.coeffs[0, 0] == pytest.approx(1.0)


def test_partial_trace_thermal():
    s = fock.make_tmsv(0.5, 30)
    red = fock.partial_trace(s, [0])
    pops = np.real(np.diag(red.coeffs))
    assert pops[:5] == pytest.approx([0.75 * 0.25 ** k for k in range(5)], abs=1e-12)
    assert fock.photon_number(s, 0) == pytest.approx(1 / 3)


def test_beamsplitter_hong_ou_mandel():
    s = fock.fock_state([1, 1], [2, 2])
    out = fock.apply_beamsplitter(s, 0, 1, 0.5)
    t = out.tensor
    assert t[1, 1, 1, 1].real == pytest.approx(0.0, abs=1e-14)
    assert t[2, 0, 2, 0].real == pytest.approx(0.5)
    assert t[0, 2, 0, 2].real == pytest.approx(0.5)


def test_beamsplitter_unitary_on_fitting_inputs():
    u = fock.beamsplitter_unitary(6, 6, 0.3).reshape(6, 6, 6, 6)
    # columns with n + m <= 5 stay inside the truncated space
    cols = [(n, m) for n in range(6) for m in range(6) if n + m <= 5]
    mat = np.array([u[:, :, n, m].ravel() for n, m in cols]).T
    assert np.allclose(mat.conj().T @ mat, np.eye(len(cols)), atol=1e-12)


def test_cutoff_convergence_lossy_tmsv():
    a = fock.apply_loss(fock.make_tmsv(0.5, 17), 1, 0.5)
    b = fock.apply_loss(fock.make_tmsv(0.5, 22), 1, 0.5)
    a = fock.pad_cutoff(fock.pad_cutoff(a, 0, 22), 1, 22)
    assert fock.trace_distance(a, b) < 1e-6


def test_zero_probability_branch():
    with pytest.raises(fock.ZeroProbabilityBranch):
        fock.project_fock(fock.fock_state([0, 0], [2, 2]), 0, 2)


def test_metadata():
    md = fock.make_tmsv(0.5, 15).metadata()
    assert md["cutoffs"] == [15, 15]
    assert md["weight"] == 1.0


@FAST
@given(chi=st.floats(0.0, 0.6), eta=st.floats(0.0, 1.0))
def test_loss_trace_and_positivity(chi, eta):
    out = fock.apply_loss(fock.make_tmsv(chi, 10), 1, eta)
    assert out.trace() == pytest.approx(1.0, abs=1e-10)
    assert fock.min_eigenvalue(out) > -1e-12


@FAST
@given(chi=st.floats(0.05, 0.6), g=st.floats(1.0, 6.0), n=st.integers(1, 3))
def test_nla_keeps_state_valid(chi, g, n):
    out = fock.apply_nla(fock.make_tmsv(chi, 10), 1, g, n)
    assert out.trace() == pytest.approx(1.0, abs=1e-10)
    assert 0 < out.weight <= 1.0 + 1e-12
    assert fock.min_eigenvalue(out) > -1e-12


@FAST
@given(eta1=st.floats(0.05, 1.0), eta2=st.floats(0.05, 1.0))
def test_loss_semigroup(eta1, eta2):
    s = fock.make_tmsv(0.4, 8)
    a = fock.apply_loss(fock.apply_loss(s, 1, eta1), 1, eta2)
    b = fock.apply_loss(s, 1, eta1 * eta2)
    assert fock.trace_distance(a, b) < 1e-10
