"""Operator zeros of the B family, label bookkeeping, basis calibration,
measure and the separated resolution of the identity."""

import numpy as np
import pytest

from sgsov import model_core as mc
from sgsov import sov_basis as sb

from conftest import n1_params, cfg_a_params


def test_kappa_index_corners():
    assert sb.kappa_index((1, 1, 1), 3) == 1
    assert sb.kappa_index((3, 3, 3), 3) == 27
    assert sb.kappa_index((2, 1, 1), 3) == 2
    assert sb.kappa_index((1, 2, 1), 3) == 4


def test_kappa_index_roundtrip_exhaustive():
    p, n = 3, 3
    seen = set()
    for j in range(1, p ** n + 1):
        h = sb.inverse_kappa(j, p, n)
        assert sb.kappa_index(h, p) == j
        seen.add(h)
    assert len(seen) == p ** n


def test_kappa_index_range_errors():
    with pytest.raises(IndexError):
        sb.kappa_index((0, 1), 3)
    with pytest.raises(IndexError):
        sb.inverse_kappa(10, 3, 2)


def test_single_site_zero_is_xi_cubed():
    params = n1_params()
    grid = sb.b_zeros(params)
    assert abs(grid.z[0] - 1.1 ** 3) <= 1e-12
    assert abs(grid.eta0[0] ** 3 - grid.z[0]) <= 1e-12


def test_zero_collision_guard():
    with pytest.raises(sb.SimplicityViolation):
        sb.b_zeros(cfg_a_params(), rel_gap=10.0)


def test_average_vanishes_at_returned_zeros(cfg_a):
    grid = cfg_a.basis.grid
    ref = abs(mc.average_value(cfg_a.params, "B",
                               1.5 * np.max(np.abs(grid.z))))
    for a in range(cfg_a.params.n_separate):
        assert abs(mc.average_value(cfg_a.params, "B", grid.z[a])) <= 1e-9 * ref


def test_squared_zeros_conjugation_closed(cfg_a):
    zsq = cfg_a.basis.grid.z[: cfg_a.params.n_separate] ** 2
    scale = np.max(np.abs(zsq))
    for z in zsq:
        assert np.min(np.abs(zsq - np.conj(z))) <= 1e-9 * scale


def test_root_squares_real_or_paired(desk_bundles):
    for bundle in desk_bundles.values():
        sq = bundle.basis.grid.eta0 ** 2
        scale = np.max(np.abs(sq))
        for v in sq:
            real_ok = abs(v.imag) <= 1e-8 * scale
            paired = np.min(np.abs(sq - np.conj(v))) <= 1e-8 * scale
            assert real_ok or paired


def test_grid_is_power_consistent(desk_bundles):
    for bundle in desk_bundles.values():
        grid = bundle.basis.grid
        p = bundle.params.p
        for a in range(bundle.params.n_sites):
            for h in range(p):
                assert abs(grid.grid[a, h] ** p - grid.z[a]) <= 1e-10 * abs(grid.z[a])


def test_left_covectors_are_b_eigenvectors(desk_bundles):
    for bundle in desk_bundles.values():
        params, basis, mono = bundle.params, bundle.basis, bundle.mono
        rng = bundle.rng(201)
        for lam in params.spectral_samples(rng, 3, exclude=basis.grid.grid.reshape(-1)):
            B = mono.B.evaluate(lam)
            pats = sb.b_pattern(params, basis.grid, basis.tuples, lam)
            res = np.linalg.norm(basis.left @ B - pats[:, None] * basis.left, axis=1)
            rel = res / (np.linalg.norm(B) * np.linalg.norm(basis.left, axis=1))
            assert np.max(rel) <= 1e-8


def test_label_assignment_is_bijective(cfg_a):
    # every tuple occurs exactly once and the pattern match is tight
    params, basis, mono = cfg_a.params, cfg_a.basis, cfg_a.mono
    lam = params.spectral_samples(cfg_a.rng(202), 1,
                                  exclude=basis.grid.grid.reshape(-1))[0]
    B = mono.B.evaluate(lam)
    pats = sb.b_pattern(params, basis.grid, basis.tuples, lam)
    measured = np.array([(basis.left[j] @ B @ basis.right[:, j]) / basis.mjj[j]
                         for j in range(params.dim)])
    assert np.max(np.abs(measured - pats) / np.max(np.abs(pats))) <= 1e-8


def test_biorthogonality(desk_bundles):
    for bundle in desk_bundles.values():
        basis = bundle.basis
        G = basis.left @ basis.right
        off = G - np.diag(np.diag(G))
        nl = np.linalg.norm(basis.left, axis=1)
        nr = np.linalg.norm(basis.right, axis=0)
        assert np.max(np.abs(off) / (nl[:, None] * nr[None, :])) <= 1e-9


def test_left_shift_relations(desk_bundles):
    # construction uses the upward shifts; the downward family is independent
    for bundle in desk_bundles.values():
        params, basis, mono = bundle.params, bundle.basis, bundle.mono
        for j in range(params.dim):
            tup = basis.tuples[j]
            for a in range(params.n_separate):
                eta = basis.grid.grid[a, tup[a]]
                target = mc.a_coeff(params, eta) \
                    * basis.left[basis.shifted_index(j, a, -1)]
                got = basis.left[j] @ mono.A.evaluate(eta)
                assert np.linalg.norm(got - target) <= \
                    1e-8 * max(np.linalg.norm(target), 1e-300)


def test_right_shift_relations(desk_bundles):
    for bundle in desk_bundles.values():
        params, basis, mono = bundle.params, bundle.basis, bundle.mono
        for j in range(params.dim):
            tup = basis.tuples[j]
            for a in range(params.n_separate):
                eta = basis.grid.grid[a, tup[a]]
                target = mc.dbar_coeff(params, eta) \
                    * basis.right[:, basis.shifted_index(j, a, -1)]
                got = mono.D.evaluate(eta) @ basis.right[:, j]
                assert np.linalg.norm(got - target) <= \
                    1e-8 * max(np.linalg.norm(target), 1e-300)


def test_cycle_products_match_averages(desk_bundles):
    for bundle in desk_bundles.values():
        params, basis = bundle.params, bundle.basis
        for a in range(params.n_separate):
            dprod = np.prod(mc.d_coeff(params, basis.grid.grid[a]))
            dav = mc.average_value(params, "D", basis.grid.z[a])
            assert abs(dprod - dav) <= 1e-7 * abs(dav)
            aprod = np.prod(mc.abar_coeff(params, basis.grid.grid[a]))
            aav = mc.average_value(params, "A", basis.grid.z[a])
            assert abs(aprod - aav) <= 1e-7 * abs(aav)


def test_pairing_matches_closed_form(desk_bundles):
    for bundle in desk_bundles.values():
        basis = bundle.basis
        mf = sb.mjj_formula(basis)
        assert np.max(np.abs(basis.mjj - mf) / np.abs(mf)) <= 1e-8


def test_pairing_independent_of_reference_label(cfg_b):
    # on the even chain the diagonal pairing must not see the last variable
    basis = cfg_b.basis
    p = cfg_b.params.p
    for j in range(cfg_b.params.dim):
        j0 = basis.shifted_index(j, cfg_b.params.n_sites - 1,
                                 -int(basis.tuples[j][-1]))
        assert abs(basis.mjj[j] - basis.mjj[j0]) <= 1e-9 * abs(basis.mjj[j0])


def test_measure_nonzero_but_not_positive(cfg_a):
    measure = cfg_a.basis.measure
    assert np.min(np.abs(measure)) > 0
    # the weights are genuinely complex: not a probability measure
    assert np.max(np.abs(measure.imag)) > 1e-6 * np.max(np.abs(measure))


def test_identity_resolution(desk_bundles):
    tols = {"n1": 1e-12, "cfg_b": 1e-9, "cfg_a": 1e-8}
    for name, bundle in desk_bundles.items():
        d = bundle.params.dim
        ident = sb.identity_resolution_sov(bundle.basis)
        assert mc.frob(ident - np.eye(d)) <= tols[name] * d


def test_identity_resolution_explicit_weights(desk_bundles):
    for bundle in desk_bundles.values():
        basis = bundle.basis
        w = sb.measure_weights_formula(basis)
        ident = (basis.right * w[None, :]) @ basis.left
        d = bundle.params.dim
        assert mc.frob(ident - np.eye(d)) <= 1e-8 * d
        assert np.max(np.abs(w - basis.measure) / np.abs(w)) <= 1e-8


def test_reference_shift_closes_cycle(cfg_b):
    # labels shift around the reference direction with unit phases: the
    # grading charge acts as the exact unit lowering shift on covectors
    basis, params = cfg_b.basis, cfg_b.params
    theta = mc.theta_charge(params)
    for j in range(params.dim):
        got = basis.left[j] @ theta
        ref = basis.left[basis.shifted_index(j, params.n_sites - 1, -1)]
        assert np.linalg.norm(got - ref) <= 1e-8 * np.linalg.norm(ref)


def test_label_shifts_invert_and_close(cfg_a):
    basis = cfg_a.basis
    p = cfg_a.params.p
    for j in (0, 7, 13, 26):
        for a in range(cfg_a.params.n_sites):
            assert basis.shifted_index(basis.shifted_index(j, a, +1), a, -1) == j
            k = j
            for _ in range(p):
                k = basis.shifted_index(k, a, +1)
            assert k == j


def test_gauge_table(cfg_a):
    basis = cfg_a.basis
    nsep = cfg_a.params.n_separate
    expect = basis.grid.grid[:nsep] ** (nsep - 1)
    assert np.array_equal(basis.omega, expect)


def test_stretch_basis_builds(stretch):
    d = stretch.params.dim
    assert d == 125
    ident = sb.identity_resolution_sov(stretch.basis)
    assert mc.frob(ident - np.eye(d)) <= 1e-8 * d
