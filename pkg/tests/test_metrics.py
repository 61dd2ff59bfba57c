import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairpc.core import GramSet, GroupedDataset, build_gram_set
from fairpc.errors import InputError
from fairpc.metrics import (FAIR, STANDARD, build_loss_report, incremental_loss,
                            marginal_loss, reconstruction_loss, replay_incremental,
                            standard_pca_basis)
from fairpc.orthonormalization import fit
from fairpc.solvers import SolverConfig

from conftest import C22, ROT_Z, S22

ROT_DATA = GroupedDataset(["a", "b"], [
    [[1, 0], [-1, 0], [0, np.sqrt(0.5)], [0, -np.sqrt(0.5)]],
    [[np.sqrt(0.5), np.sqrt(0.5)], [-np.sqrt(0.5), -np.sqrt(0.5)], [0.5, -0.5], [-0.5, 0.5]],
])


def test_rot_data_realises_the_rotated_grams(rot):
    np.testing.assert_allclose(build_gram_set(ROT_DATA).grams, rot.grams, atol=1e-15)


def test_reconstruction_examples():
    S = np.diag([2.0, 1.0])
    assert reconstruction_loss(S, 3.0, np.array([[1.0], [0.0]])) == 1.0
    assert reconstruction_loss(S, 3.0, np.eye(2)) == pytest.approx(0.0, abs=1e-9)
    assert reconstruction_loss(S, 3.0, np.array([C22, S22])) == pytest.approx(
        3 - (2 * C22 ** 2 + S22 ** 2), abs=1e-14)
    with pytest.raises(InputError):
        reconstruction_loss(S, 3.0, np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_marginal_examples():
    S = np.diag([2.0, 1.0])
    assert marginal_loss(S, np.array([1.0, 0.0])) == 0.0
    assert marginal_loss(S, np.array([0.0, 1.0])) == 1.0
    assert marginal_loss(S, np.array([C22, S22])) == pytest.approx(ROT_Z, abs=1e-14)
    with pytest.raises(InputError):
        marginal_loss(S, np.array([[2.0], [0.0]]))


def test_incremental_examples(rot):
    b = fit(rot, 2)
    for g in (0, 1):
        assert incremental_loss(rot, b, g, 1) == pytest.approx(ROT_Z, abs=1e-12)
        assert incremental_loss(rot, b, g, 2) == pytest.approx(ROT_Z, abs=1e-12)
    same = GramSet.from_grams([np.diag([3.0, 1.0])] * 2)
    bs = fit(same, 2)
    assert incremental_loss(same, bs, 0, 2) == 0 and incremental_loss(same, bs, 1, 2) == 0
    with pytest.raises(InputError):
        incremental_loss(rot, b, 2, 1)
    with pytest.raises(InputError):
        incremental_loss(rot, b, 0, 3)


def test_incremental_replay_agrees(three):
    b = fit(three, 3, SolverConfig(max_iter_fw=500))
    stored = np.array([r.h for r in b.per_iteration]).T
    replay = replay_incremental(three, b.components)
    np.testing.assert_allclose(replay, stored, rtol=1e-8, atol=1e-12)


def test_standard_pca_examples(rot):
    std = standard_pca_basis(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(std.V, np.eye(3)[:, :2])
    assert not std.degenerate
    assert standard_pca_basis(np.eye(3), 1).degenerate
    a = standard_pca_basis(np.eye(3), 1)
    np.testing.assert_array_equal(a.V, standard_pca_basis(np.eye(3), 1).V)
    std = standard_pca_basis(rot.pooled(), 1)
    assert std.eigenvalues[0] == pytest.approx((6 + np.sqrt(2)) / 2, abs=1e-12)
    np.testing.assert_allclose(std.V[:, 0], [C22, S22], atol=1e-9)
    with pytest.raises(InputError):
        standard_pca_basis(np.eye(2), 3)


def test_report_rotated():
    fair, std, _ = build_loss_report(ROT_DATA, 2)
    assert fair.method == FAIR and std.method == STANDARD
    assert fair.ranks == (1, 2)
    np.testing.assert_allclose(fair.incremental[0], fair.incremental[1], atol=1e-12)
    np.testing.assert_allclose(fair.duality_gaps, 0.0, atol=1e-9)
    assert std.duality_gaps is None
    rows = fair.rows()
    assert len(rows) == 4 and rows[0][:3] == (FAIR, "a", 1)


def test_report_single_group_matches_standard():
    rng = np.random.default_rng(2)
    ds = GroupedDataset(["only"], [rng.standard_normal((30, 5))]).centered()
    fair, std, _ = build_loss_report(ds, 5)
    for name in ("marginal", "incremental", "reconstruction"):
        np.testing.assert_allclose(getattr(fair, name), getattr(std, name), atol=1e-8)
    np.testing.assert_allclose(std.marginal, 0.0, atol=1e-8)


def test_report_identical_groups():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((20, 4))
    fair, std, _ = build_loss_report(GroupedDataset(["a", "b"], [A, A]), 4)
    for name in ("marginal", "incremental", "reconstruction"):
        np.testing.assert_allclose(getattr(fair, name), getattr(std, name), atol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(2, 5))
def test_report_invariants(seed, k, n):
    rng = np.random.default_rng(seed)
    ds = GroupedDataset([f"g{i}" for i in range(k)],
                        [rng.standard_normal((n + 4, n)) for _ in range(k)])
    cfg = SolverConfig(max_iter_fw=300)
    fair, std, _ = build_loss_report(ds, n, cfg)
    for rep in (fair, std):
        assert np.all(np.diff(rep.reconstruction, axis=1) <= 1e-9)
        assert np.all(np.diff(rep.incremental, axis=1) >= -1e-9)
        assert np.all(rep.marginal <= rep.reconstruction + 1e-9)
        assert np.all(rep.reconstruction >= -1e-9)
    np.testing.assert_allclose(fair.incremental[:, 0], fair.marginal[:, 0], atol=1e-8)
    again, _, _ = build_loss_report(ds, n, cfg)
    assert np.array_equal(again.marginal, fair.marginal)
    assert np.array_equal(again.incremental, fair.incremental)
