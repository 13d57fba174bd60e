import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binreg import (CsvFormatError, DimensionMismatch, EmptyGroup,
                    NonBinaryLabel, NonFiniteValue, build_dataset,
                    dataset_from_arrays, extended_design, group_stats,
                    read_csv)


class TestBuildDataset:
    def test_minimal_pair(self):
        ds = build_dataset([(1, 0), (2, 1)])
        assert (ds.n0, ds.n1, ds.d) == (1, 1, 1)
        assert ds.x[:, 0].tolist() == [1.0, 2.0]

    def test_single_group_rejected(self):
        with pytest.raises(EmptyGroup):
            build_dataset([(1, 0), (2, 0)])

    def test_non_binary_label(self):
        with pytest.raises(NonBinaryLabel):
            build_dataset([(1, 2)])

    def test_fractional_label_rejected(self):
        with pytest.raises(NonBinaryLabel):
            build_dataset([(1, 0.5), (2, 1)])

    def test_exact_real_labels_accepted(self):
        ds = build_dataset([(1, 0.0), (2, 1.0)])
        assert ds.y.tolist() == [0, 1]

    def test_mixed_dimensions(self):
        with pytest.raises(DimensionMismatch):
            build_dataset([((1, 2), 0), (3, 1)])

    def test_non_finite(self):
        with pytest.raises(NonFiniteValue):
            build_dataset([(math.nan, 0), (1, 1)])

    def test_empty_input(self):
        with pytest.raises(DimensionMismatch):
            build_dataset([])

    def test_arrays_frozen(self):
        ds = build_dataset([(1, 0), (2, 1)])
        with pytest.raises(ValueError):
            ds.x[0, 0] = 5.0


class TestGroupStats:
    def test_alternating(self):
        ds = dataset_from_arrays(np.array([0.0, 1, 2, 3]), [0, 1, 0, 1])
        gs = group_stats(ds)
        assert gs.xbar0[0] == 1.0
        assert gs.xbar1[0] == 2.0
        assert gs.delta[0] == 1.0

    def test_symmetric_assignment_gives_zero(self):
        ds = dataset_from_arrays(np.array([0.0, 1, 2, 3]), [1, 0, 0, 1])
        assert group_stats(ds).delta[0] == 0.0

    def test_vector_case(self):
        ds = build_dataset([((1, 0), 0), ((0, 1), 1)])
        assert group_stats(ds).delta.tolist() == [-1.0, 1.0]

    @given(
        n=st.integers(4, 200),
        seed=st.integers(0, 10_000),
        d=st.integers(1, 3),
    )
    @settings(max_examples=60, deadline=None)
    def test_weighted_mean_identity(self, n, seed, d):
        """n0*xbar0 + n1*xbar1 recovers n times the overall mean exactly."""
        rng = np.random.default_rng(seed)
        x = rng.normal(scale=100.0, size=(n, d))
        y = rng.integers(0, 2, size=n)
        if y.sum() in (0, n):
            y[0] = 1 - y[0]
        ds = dataset_from_arrays(x, y)
        gs = group_stats(ds)
        total = ds.n0 * gs.xbar0 + ds.n1 * gs.xbar1
        overall = np.array([math.fsum(x[:, j]) for j in range(d)])
        assert np.all(np.abs(total - overall) <= 1e-9 * (1.0 + np.abs(overall)))


class TestExtendedDesign:
    def test_distinct_values_full_rank(self):
        ds = dataset_from_arrays(np.array([1.0, 2, 3]), [0, 1, 1])
        dm = extended_design(ds)
        assert dm.xt.shape == (3, 2)
        assert np.all(dm.xt[:, 0] == 1.0)
        assert dm.rank_ok

    def test_constant_column_collinear_with_intercept(self):
        ds = dataset_from_arrays(np.array([5.0, 5, 5]), [0, 1, 1])
        assert not extended_design(ds).rank_ok

    def test_exact_collinearity(self):
        ds = build_dataset([((1, 2), 0), ((2, 4), 1), ((3, 6), 0)])
        assert not extended_design(ds).rank_ok

    def test_more_params_than_rows(self):
        ds = build_dataset([((1, 2), 0), ((2, 1), 1)])
        assert not extended_design(ds).rank_ok

    @given(seed=st.integers(0, 5000))
    @settings(max_examples=50, deadline=None)
    def test_rank_invariant_under_row_permutation(self, seed):
        rng = np.random.default_rng(seed)
        n, d = 8, 2
        x = rng.normal(size=(n, d))
        if seed % 3 == 0:
            x[:, 1] = 2.0 * x[:, 0]  # force deficiency on a third of cases
        y = np.array([0, 1] * (n // 2))
        ds = dataset_from_arrays(x, y)
        perm = rng.permutation(n)
        ds_perm = dataset_from_arrays(x[perm], y[perm])
        assert extended_design(ds).rank_ok == extended_design(ds_perm).rank_ok


class TestCsv:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,y,b\n1.5,0,2.5\n2.5,1,3.5\n")
        ds = read_csv(path)
        assert ds.d == 2
        assert ds.x.tolist() == [[1.5, 2.5], [2.5, 3.5]]
        assert ds.y.tolist() == [0, 1]

    def test_non_numeric_cell_reports_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1,0\noops,1\n")
        with pytest.raises(CsvFormatError, match=r"row 2, column 0"):
            read_csv(path)

    def test_missing_y_column(self, tmp_path):
        path = tmp_path / "noy.csv"
        path.write_text("a,b\n1,0\n")
        with pytest.raises(CsvFormatError, match="'y'"):
            read_csv(path)

    def test_non_binary_label(self, tmp_path):
        path = tmp_path / "lbl.csv"
        path.write_text("x,y\n1,2\n2,1\n")
        with pytest.raises(NonBinaryLabel):
            read_csv(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("x,y\n")
        with pytest.raises(CsvFormatError):
            read_csv(path)

    def test_real_valued_labels(self, tmp_path):
        path = tmp_path / "real.csv"
        path.write_text("x,y\n1,0.0\n2,1.0\n")
        assert read_csv(path).y.tolist() == [0, 1]
