"""File formats: edge lists, UCI bag-of-words, CSV matrices, JSON parameters.

All numeric text output uses 17 significant digits so doubles round-trip
exactly.
"""

import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .spectral import SparseCounts, SparseSymAdjacency

_FLOAT_FMT = "%.17g"


def _fmt(x):
    return _FLOAT_FMT % float(x)


# ---------------------------------------------------------------------------
# edge lists: "i<TAB>j[<TAB>weight]", 0-based, '#' comments


def read_edge_list(path, n=None):
    """Parse an edge-list file into a SparseSymAdjacency.

    When ``n`` is omitted the node count is 1 + the largest index seen.
    Duplicate edges (in either orientation) are rejected.
    """
    rows, cols, weights = [], [], []
    max_idx = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataError(f"{path}:{lineno}: expected 'i<TAB>j[<TAB>weight]'")
            try:
                i, j = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            if i == j:
                raise DataError(f"{path}:{lineno}: self-loop ({i}, {j})")
            rows.append(i)
            cols.append(j)
            weights.append(w)
            max_idx = max(max_idx, i, j)
    if n is None:
        n = max_idx + 1
    return SparseSymAdjacency(
        n=max(n, 0),
        rows=np.array(rows, dtype=np.int64),
        cols=np.array(cols, dtype=np.int64),
        weights=np.array(weights, dtype=float),
    )


def write_edge_list(path, adj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes\t{adj.n}\n")
        for i, j, w in zip(adj.rows, adj.cols, adj.weights):
            if w == 1.0:
                fh.write(f"{i}\t{j}\n")
            else:
                fh.write(f"{i}\t{j}\t{_fmt(w)}\n")


# ---------------------------------------------------------------------------
# UCI docword format: three header lines (D, V, NNZ), then 1-based triples


def read_docword(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = []
        while len(header) < 3:
            line = fh.readline()
            if not line:
                raise DataError(f"{path}: truncated header")
            line = line.strip()
            if line:
                header.append(line)
        try:
            n_docs, n_words, nnz = (int(h) for h in header)
        except ValueError as exc:
            raise DataError(f"{path}: bad header: {exc}") from exc
        words, docs, counts = [], [], []
        seen = set()
        for lineno, line in enumerate(fh, start=4):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 'docID wordID count'")
            d, w, c = int(parts[0]), int(parts[1]), int(parts[2])
            if not (1 <= d <= n_docs and 1 <= w <= n_words):
                raise DataError(f"{path}:{lineno}: index out of declared range")
            if (d, w) in seen:
                raise DataError(f"{path}:{lineno}: duplicate (doc, word) pair")
            seen.add((d, w))
            docs.append(d - 1)
            words.append(w - 1)
            counts.append(c)
    if len(words) != nnz:
        raise DataError(f"{path}: header declares {nnz} entries, found {len(words)}")
    return SparseCounts(
        n_words=n_words,
        n_docs=n_docs,
        words=np.array(words, dtype=np.int64),
        docs=np.array(docs, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64),
    )


def write_docword(path, counts):
    order = np.lexsort((counts.words, counts.docs))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{counts.n_docs}\n{counts.n_words}\n{counts.words.size}\n")
        for k in order:
            fh.write(f"{counts.docs[k] + 1} {counts.words[k] + 1} {counts.counts[k]}\n")


# ---------------------------------------------------------------------------
# dense matrices as CSV with a "# rows,cols" comment line


def write_matrix_csv(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {M.shape[0]},{M.shape[1]}\n")
        for row in M:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def read_matrix_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise DataError(f"{path}: missing '# rows,cols' header")
        try:
            r, c = (int(x) for x in header[1:].split(","))
        except ValueError as exc:
            raise DataError(f"{path}: bad header: {exc}") from exc
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (r, c):
        raise DataError(f"{path}: declared {(r, c)}, found {data.shape}")
    return data


# ---------------------------------------------------------------------------
# JSON parameter documents


def write_params_json(path, doc):
    """Serialize a parameter document, converting arrays to nested lists."""

    def convert(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, (np.bool_,)):
            return bool(obj)
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [convert(v) for v in obj]
        return obj

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(convert(doc), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_params_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def read_flat_config(path):
    """Flat ``key = value`` text with '#' comments; returns a str->str dict."""
    out = {}
    path = Path(path)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
