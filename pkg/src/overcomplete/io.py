"""Text formats for embeddings, codes and evaluation datasets.

Embeddings are read from ``word v1 ... vL`` lines, optionally preceded by a
``V L`` header.  Sparse codes are written either densely in that same
format (zeros spelled out) or as ``word idx:val ...`` after a ``V K``
header.  Floats are written with ``repr`` so every value reads back to the
same bits.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import BinaryEmbeddings, EmbeddingMatrix, SparseEmbeddings

logger = logging.getLogger(__name__)

LAYOUTS = ("dense-text", "index-value")


class ParseError(ValueError):
    def __init__(self, path, lineno, msg):
        self.path = str(path)
        self.lineno = lineno
        where = f"{path}:{lineno}" if lineno else str(path)
        super().__init__(f"{where}: {msg}")


@dataclass
class SimilarityDataset:
    pairs: list[tuple[str, str, float]]

    def __len__(self):
        return len(self.pairs)


@dataclass
class LabeledTextDataset:
    examples: list[tuple[list[str], str]]
    labels: list[str]
    # indices of examples with no tokens
    empty: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.examples)


def _lines(path):
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                yield lineno, line.rstrip("\r\n")
    except UnicodeDecodeError as e:
        raise ParseError(path, 0, f"not valid UTF-8 ({e})") from e


def _float(path, lineno, tok):
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(path, lineno, f"non-numeric field {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, lineno, f"non-finite value {tok!r}")
    return v


def _is_header(fields):
    if len(fields) != 2:
        return False
    try:
        return int(fields[0]) >= 0 and int(fields[1]) >= 0
    except ValueError:
        return False


def read_embeddings(path, format: str = "auto") -> EmbeddingMatrix:
    """Read dense vectors.

    ``format`` is ``"plain"``, ``"headered"`` or ``"auto"``; auto treats a
    first line of exactly two non-negative integers as a ``V L`` header.
    Repeated words keep their first vector and are counted in a warning.
    """
    if format not in ("auto", "headered", "plain"):
        raise ValueError(f"unknown embedding format {format!r}")
    vocab: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dups = 0
    L = None
    V_declared = None
    first = True
    for lineno, line in _lines(path):
        fields = line.split()
        if not fields:
            continue
        if first:
            first = False
            if format == "headered" or (format == "auto" and _is_header(fields)):
                if not _is_header(fields):
                    raise ParseError(path, lineno, "expected a 'V L' header")
                V_declared, L = int(fields[0]), int(fields[1])
                continue
        if L is None:
            L = len(fields) - 1
            if L < 1:
                raise ParseError(path, lineno, "record has no vector values")
        if len(fields) != L + 1:
            raise ParseError(path, lineno, f"expected {L} values, found {len(fields) - 1}")
        vec = [_float(path, lineno, t) for t in fields[1:]]
        word = fields[0]
        if word in seen:
            dups += 1
            continue
        seen.add(word)
        vocab.append(word)
        rows.append(vec)
    if L is None:
        raise ParseError(path, 0, "no embeddings found")
    if V_declared is not None and V_declared != len(vocab) + dups:
        raise ParseError(path, 1, f"header declares {V_declared} rows, file has {len(vocab) + dups}")
    if dups:
        logger.warning("%s: %d duplicate words ignored (first occurrence kept)", path, dups)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), L)
    return EmbeddingMatrix(tuple(vocab), data)


def read_sparse(path) -> SparseEmbeddings:
    """Read the ``index-value`` layout written by :func:`write_sparse`."""
    it = _lines(path)
    header = None
    for lineno, line in it:
        if line.strip():
            header = (lineno, line.split())
            break
    if header is None or not _is_header(header[1]):
        raise ParseError(path, header[0] if header else 0, "expected a 'V K' header")
    V, K = int(header[1][0]), int(header[1][1])
    vocab, rows, seen = [], [], set()
    for lineno, line in it:
        fields = line.split()
        if not fields:
            continue
        word = fields[0]
        if word in seen:
            raise ParseError(path, lineno, f"duplicate word {word!r}")
        idx, val = [], []
        for tok in fields[1:]:
            i, sep, v = tok.partition(":")
            if not sep:
                raise ParseError(path, lineno, f"expected idx:val, found {tok!r}")
            try:
                i = int(i)
            except ValueError:
                raise ParseError(path, lineno, f"bad index {i!r}") from None
            if not 0 <= i < K or (idx and i <= idx[-1]):
                raise ParseError(path, lineno, f"index {i} out of order or outside [0, {K})")
            x = _float(path, lineno, v)
            if x == 0:
                raise ParseError(path, lineno, f"stored value at index {i} is zero")
            idx.append(i)
            val.append(x)
        seen.add(word)
        vocab.append(word)
        rows.append((np.array(idx, dtype=np.int64), np.array(val, dtype=np.float64)))
    if len(vocab) != V:
        raise ParseError(path, 1, f"header declares {V} rows, file has {len(vocab)}")
    return SparseEmbeddings(tuple(vocab), K, tuple(rows))


def read_vectors(path):
    """Read dense or index-value vectors, deciding by the first record."""
    with open(path, encoding="utf-8") as f:
        head = [ln for _, ln in zip(range(2), (l for l in f if l.strip()))]
    if len(head) == 2 and _is_header(head[0].split()) and ":" in head[1]:
        return read_sparse(path)
    return read_embeddings(path)


def _fmt(v: float) -> str:
    return repr(float(v))


def _write(path, lines):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line)
                f.write("\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def _check_word(word):
    if not word or any(c.isspace() for c in word):
        raise ValueError(f"word {word!r} is empty or contains whitespace")


def write_embeddings(path, X: EmbeddingMatrix, header: bool = False, fmt=_fmt) -> None:
    def lines():
        if header:
            yield f"{X.V} {X.L}"
        for w, row in zip(X.vocab, X.data):
            _check_word(w)
            yield " ".join([w] + [fmt(v) for v in row])

    _write(path, lines())


def write_sparse(path, A: SparseEmbeddings, layout: str = "dense-text") -> None:
    """Write codes as ``dense-text`` (``0`` for absent entries) or ``index-value``."""
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")

    def dense_lines():
        for w, r in zip(A.vocab, A.rows):
            _check_word(w)
            cells = ["0"] * A.K
            for i, v in zip(r.indices, r.values):
                cells[i] = _fmt(v)
            yield " ".join([w] + cells)

    def iv_lines():
        yield f"{A.V} {A.K}"
        for w, r in zip(A.vocab, A.rows):
            _check_word(w)
            yield " ".join([w] + [f"{i}:{_fmt(v)}" for i, v in zip(r.indices, r.values)])

    _write(path, dense_lines() if layout == "dense-text" else iv_lines())


def write_binary(path, B: BinaryEmbeddings, layout: str = "dense-text") -> None:
    """Write binary codes with ``0``/``1`` cells, or ``idx:1`` entries."""
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")

    def lines():
        if layout == "index-value":
            yield f"{B.V} {B.K}"
        for w, r in zip(B.vocab, B.rows):
            _check_word(w)
            if layout == "index-value":
                yield " ".join([w] + [f"{i}:1" for i in r])
            else:
                cells = ["0"] * B.K
                for i in r:
                    cells[i] = "1"
                yield " ".join([w] + cells)

    _write(path, lines())


def read_similarity(path) -> SimilarityDataset:
    """Read ``word1 word2 score`` lines (tab or space separated); ``#`` starts a comment."""
    pairs = []
    for lineno, line in _lines(path):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        fields = [f.strip() for f in fields]
        if len(fields) != 3:
            raise ParseError(path, lineno, f"expected 3 fields, found {len(fields)}")
        pairs.append((fields[0], fields[1], _float(path, lineno, fields[2])))
    if not pairs:
        raise ParseError(path, 0, "empty similarity file")
    return SimilarityDataset(pairs)


def read_labeled(path, lowercase: bool = False) -> LabeledTextDataset:
    """Read ``label<TAB>text`` lines; text is split on whitespace."""
    examples, labels, empty = [], [], []
    seen = set()
    for lineno, line in _lines(path):
        if not line.strip():
            continue
        label, sep, text = line.partition("\t")
        label = label.strip()
        if not sep or not label:
            raise ParseError(path, lineno, "expected 'label<TAB>text'")
        if lowercase:
            text = text.lower()
        tokens = text.split()
        if not tokens:
            empty.append(len(examples))
        if label not in seen:
            seen.add(label)
            labels.append(label)
        examples.append((tokens, label))
    if not examples:
        raise ParseError(path, 0, "empty labeled file")
    return LabeledTextDataset(examples, labels, empty)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
