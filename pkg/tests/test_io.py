import numpy as np
import pytest

from conekit import SparseCounts, SparseSymAdjacency
from conekit.errors import DataError
from conekit.io import (
    read_docword,
    read_edge_list,
    read_flat_config,
    read_matrix_csv,
    read_params_json,
    write_docword,
    write_edge_list,
    write_matrix_csv,
    write_params_json,
)


class TestEdgeList:
    def test_round_trip(self, tmp_path):
        adj = SparseSymAdjacency.from_edges(6, [(0, 3), (1, 2, 0.25), (4, 5)])
        path = tmp_path / "edges.tsv"
        write_edge_list(path, adj)
        back = read_edge_list(path, n=6)
        assert back.n == 6
        assert np.array_equal(back.rows, adj.rows)
        assert np.array_equal(back.cols, adj.cols)
        assert np.array_equal(back.weights, adj.weights)

    def test_comments_and_inferred_n(self, tmp_path):
        path = tmp_path / "e.tsv"
        path.write_text("# a comment\n0\t2\n\n1\t3\t0.5\n")
        adj = read_edge_list(path)
        assert adj.n == 4
        assert adj.n_edges == 2

    def test_duplicate_rejected(self, tmp_path):
        path = tmp_path / "e.tsv"
        path.write_text("0\t1\n1\t0\n")
        with pytest.raises(DataError):
            read_edge_list(path)

    def test_self_loop_rejected(self, tmp_path):
        path = tmp_path / "e.tsv"
        path.write_text("2\t2\n")
        with pytest.raises(DataError):
            read_edge_list(path)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "e.tsv"
        path.write_text("0\t1\t2\t3\n")
        with pytest.raises(DataError):
            read_edge_list(path)


class TestDocword:
    def test_round_trip(self, tmp_path):
        counts = SparseCounts(4, 3, [0, 1, 3], [0, 2, 1], [5, 1, 2])
        path = tmp_path / "docword.txt"
        write_docword(path, counts)
        back = read_docword(path)
        assert back.n_words == 4 and back.n_docs == 3
        assert back.to_scipy().toarray().tolist() == \
            counts.to_scipy().toarray().tolist()

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("2\n2\n3\n1 1 4\n")
        with pytest.raises(DataError):
            read_docword(path)

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("2\n2\n2\n1 1 4\n1 1 2\n")
        with pytest.raises(DataError):
            read_docword(path)

    def test_out_of_range(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("2\n2\n1\n3 1 4\n")
        with pytest.raises(DataError):
            read_docword(path)


class TestMatrixCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((7, 3)) * np.exp(rng.uniform(-30, 30, (7, 3)))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, M)
        back = read_matrix_csv(path)
        assert np.array_equal(back, M)   # 17 significant digits round-trip

    def test_header_checked(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# 2,2\n1.0,2.0\n")
        with pytest.raises(DataError):
            read_matrix_csv(path)


class TestParamsJson:
    def test_arrays_round_trip(self, tmp_path):
        doc = {"theta": np.array([[0.25, 0.75]]), "corners": np.array([3, 1]),
               "delta_used": np.float64(0.125), "nested": {"flag": np.bool_(True)}}
        path = tmp_path / "p.json"
        write_params_json(path, doc)
        back = read_params_json(path)
        assert back["theta"] == [[0.25, 0.75]]
        assert back["corners"] == [3, 1]
        assert back["delta_used"] == 0.125
        assert back["nested"]["flag"] is True


class TestFlatConfig:
    def test_parse(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\nmodel = dcmmsb\nn=100\n\nrho = 0.5\n")
        cfg = read_flat_config(path)
        assert cfg == {"model": "dcmmsb", "n": "100", "rho": "0.5"}

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("model dcmmsb\n")
        with pytest.raises(DataError):
            read_flat_config(path)
