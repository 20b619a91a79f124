from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrgedge.errors import DegreeTooSmall, InvalidParams, NoConvergence
from rrgedge.graphs import complete_graph, cycle_graph, random_regular_graph
from rrgedge.spectral import (
    SpectralParameter,
    control_params,
    extreme_eigenvalues,
    full_spectrum,
    ghexp_residual,
    green_function,
    lanczos_extremes,
    normalized_matrix,
    row_sum_residual,
    stieltjes,
    trivial_eigenvalue,
    ward_residual,
)

K4 = complete_graph(4)
K4_LAMBDA = -1 / math.sqrt(2)


def resolvent_oracle(g, z):
    """P (H - z)^{-1} P from numpy eigh on the full matrix, dropping the top pair."""
    lam, u = np.linalg.eigh(normalized_matrix(g))
    ones = np.ones(g.n) / math.sqrt(g.n)
    p = np.eye(g.n) - np.outer(ones, ones)
    full = (u / (lam - z)) @ u.T
    return p @ full @ p


# ---------------------------------------------------------------- normalization


def test_normalized_k4():
    h = normalized_matrix(K4)
    off = h[~np.eye(4, dtype=bool)]
    assert np.allclose(off, 1 / math.sqrt(2))
    assert np.all(h.diagonal() == 0)


def test_normalized_row_sums():
    g = random_regular_graph(50, 6, seed=3)
    assert np.allclose(normalized_matrix(g).sum(axis=1), 6 / math.sqrt(5), atol=1e-13)


def test_normalized_cycle_is_adjacency():
    assert np.array_equal(normalized_matrix(cycle_graph(6)), cycle_graph(6).adjacency(float))


def test_degree_too_small():
    from rrgedge.graphs import RegularGraph

    with pytest.raises(DegreeTooSmall):
        normalized_matrix(RegularGraph(4, 1, [(0, 1), (2, 3)]))


def test_spectral_parameter_requires_positive_eta():
    with pytest.raises(InvalidParams):
        SpectralParameter(1.0 + 0j)
    z = SpectralParameter(0.5 + 0.25j)
    assert (z.E, z.eta) == (0.5, 0.25)


# ---------------------------------------------------------------- Green's function


def test_green_k4_closed_form():
    G = green_function(K4, 1j)
    expected = (np.eye(4) - 0.25) / (K4_LAMBDA - 1j)
    assert np.allclose(G.entries, expected, atol=1e-14)
    assert ward_residual(G) <= 1e-12


def test_stieltjes_k4():
    assert abs(stieltjes(K4, 1j) - 0.75 / (K4_LAMBDA - 1j)) <= 1e-14


@pytest.mark.parametrize("method", ["spectral", "solve"])
def test_green_matches_oracle(method):
    g = random_regular_graph(80, 6, seed=12)
    z = 0.4 + 0.05j
    G = green_function(g, z, method=method)
    assert np.abs(G.entries - resolvent_oracle(g, z)).max() <= 1e-9
    assert np.allclose(G.entries, G.entries.T, atol=1e-12)


def test_green_norm_bound_large_eta():
    g = random_regular_graph(64, 4, seed=0)
    G = green_function(g, 100j)
    assert np.abs(G.entries).max() <= 1 / 100 + 1e-6


def test_stieltjes_large_eta_and_conjugation():
    g = random_regular_graph(64, 4, seed=1)
    m = stieltjes(g, 100j)
    assert abs(m - 1j * 63 / (100 * 64)) <= 1e-3
    assert m.imag > 0
    z = 0.3 + 0.2j
    assert abs(stieltjes(g, z) - green_function(g, z).stieltjes()) <= 1e-10
    # real spectrum: m(conj z) = conj m(z)
    from rrgedge.spectral import SpectralDecomposition

    dec = SpectralDecomposition(normalized_matrix(g), with_vectors=False)
    assert abs(dec.stieltjes(np.conj(z)) - np.conj(dec.stieltjes(z))) <= 1e-15


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10**6),
    n=st.sampled_from([16, 32, 64]),
    d=st.sampled_from([3, 4, 6]),
    e=st.floats(-3, 3),
    log_eta=st.floats(-2.5, 1),
)
def test_green_identities_property(seed, n, d, e, log_eta):
    g = random_regular_graph(n, d, seed=seed)
    G = green_function(g, complex(e, 10**log_eta))
    assert ghexp_residual(g, G) <= 1e-9
    assert row_sum_residual(G) <= 1e-10
    assert ward_residual(G) <= 1e-10


def test_ward_detects_corruption():
    G = green_function(K4, 1j)
    bad = G.with_entry(0, 1, G.entries[0, 1] + 1e-3)
    assert ward_residual(bad) >= 1e-5
    g = random_regular_graph(64, 4, seed=2)
    G = green_function(g, 0.1 + 0.1j)
    bad = G.with_entry(3, 3, G.entries[3, 3] + 1e-3j)
    assert ward_residual(bad) >= 1e-5


# ---------------------------------------------------------------- spectra


def test_kn_lambda2():
    s = extreme_eigenvalues(complete_graph(5), 1)
    assert abs(s.lambda2 + 1 / math.sqrt(3)) <= 1e-12


def test_cycle_lambda2():
    s = extreme_eigenvalues(cycle_graph(6), 1)
    assert abs(s.lambda2 - 1.0) <= 1e-12
    assert abs(s.lambdaN + 2.0) <= 1e-12


def test_lanczos_matches_dense_n512():
    g = random_regular_graph(512, 8, seed=7)
    lan = extreme_eigenvalues(g, 3, seed=1, method="lanczos")
    dense = full_spectrum(g)
    assert np.abs(lan.top - dense.top[:3]).max() <= 1e-7
    assert np.abs(lan.bottom - dense.bottom[:3]).max() <= 1e-7


def test_full_spectrum_excludes_trivial():
    g = random_regular_graph(64, 3, seed=5)
    s = full_spectrum(g)
    assert len(s.full) == 63
    assert np.all(np.diff(s.full) <= 0)
    assert abs(s.lambda2 - trivial_eigenvalue(3)) > 0.1
    assert np.all(np.abs(s.full) <= trivial_eigenvalue(3) + 1e-12)
    lam_all = np.sort(np.linalg.eigvalsh(normalized_matrix(g)))[::-1]
    assert np.allclose(lam_all[1:], s.full, atol=1e-12)


def test_spectrum_csv():
    s = full_spectrum(cycle_graph(6))
    lines = s.to_csv().splitlines()
    assert lines[0] == "k,lambda"
    assert lines[1].startswith("1,2.0")
    assert len(lines) == 7


def test_lanczos_no_convergence():
    g = random_regular_graph(400, 6, seed=0)
    from rrgedge.spectral import normalized_sparse

    h = normalized_sparse(g)
    ones = np.full((1, g.n), 1 / math.sqrt(g.n))
    with pytest.raises(NoConvergence):
        lanczos_extremes(h.dot, g.n, 2, deflate=ones, seed=0, tol=1e-14, max_iter=10)


# ---------------------------------------------------------------- control parameters


def test_control_params_examples():
    c = control_params(1j, 10**6, 100)
    assert abs(c.lambda_o - 0.102) <= 1e-12
    assert abs(c.lambda_d - math.sqrt(c.lambda_o)) <= 1e-15
    assert control_params(2 + 1e-2j, 10**6, 100, K=10).in_domain
    assert not control_params(2 + 20j, 10**6, 100, K=10).in_domain
