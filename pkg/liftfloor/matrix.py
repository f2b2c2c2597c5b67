"""Sparse binary parity-check matrices and the alist interchange format."""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from typing_extensions import TypeAlias

Entry: TypeAlias = Tuple[int, int]
Dense: TypeAlias = npt.NDArray[np.uint8]


class IndexingError(RuntimeError):
    """Exception raised for out-of-range or duplicated matrix positions."""

    pass


class AlistFormatError(ValueError):
    """Exception raised for malformed alist text, with its 1-based line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParityCheckMatrix:
    """Binary m x n matrix stored sparsely per row and per column.

    Rows are checks and columns are variables. Instances are immutable
    after construction: the row and column views are tuples.

    Args:
        m : number of rows (checks)
        n : number of columns (variables)
        entries : positions (i, j) with h_ij = 1

    """

    m: int
    n: int
    rows: Tuple[Tuple[int, ...], ...]
    cols: Tuple[Tuple[int, ...], ...]

    def __init__(self, m: int, n: int, entries: Iterable[Entry]):
        if m < 1 or n < 1:
            raise IndexingError(f"Shape ({m}, {n}) must be at least (1, 1).")
        seen = set()
        rows: List[List[int]] = [[] for _ in range(m)]
        cols: List[List[int]] = [[] for _ in range(n)]
        for i, j in entries:
            i, j = int(i), int(j)
            if not (0 <= i < m and 0 <= j < n):
                raise IndexingError(f"Entry ({i}, {j}) out of range ({m}, {n}).")
            if (i, j) in seen:
                raise IndexingError(f"Duplicate entry ({i}, {j}).")
            seen.add((i, j))
            rows[i].append(j)
            cols[j].append(i)
        self.m = m
        self.n = n
        self.rows = tuple(tuple(sorted(r)) for r in rows)
        self.cols = tuple(tuple(sorted(c)) for c in cols)
        self._entries: FrozenSet[Entry] = frozenset(seen)

    @classmethod
    def from_dense(cls, dense: npt.ArrayLike) -> ParityCheckMatrix:
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise IndexingError(f"Expected a 2-d array, got shape {arr.shape}.")
        if np.any((arr != 0) & (arr != 1)):
            raise IndexingError("Entries must be binary.")
        ii, jj = np.nonzero(arr)
        return cls(arr.shape[0], arr.shape[1], zip(ii.tolist(), jj.tolist()))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.m, self.n)

    @property
    def entries(self) -> FrozenSet[Entry]:
        return self._entries

    def nnz(self) -> int:
        return len(self._entries)

    def sorted_entries(self) -> List[Entry]:
        """Entries in row-major order. Edge ids of the Tanner graph follow it."""
        return [(i, j) for i in range(self.m) for j in self.rows[i]]

    def to_dense(self) -> Dense:
        out = np.zeros((self.m, self.n), dtype=np.uint8)
        for i, j in self._entries:
            out[i, j] = 1
        return out

    def row_weights(self) -> List[int]:
        return [len(r) for r in self.rows]

    def col_weights(self) -> List[int]:
        return [len(c) for c in self.cols]

    def __contains__(self, key: Entry) -> bool:
        return key in self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self.shape, self._entries))

    def __repr__(self) -> str:
        return f"ParityCheckMatrix(m={self.m}, n={self.n}, nnz={self.nnz()})"


# ## alist


def _ints(line: str, lineno: int) -> List[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise AlistFormatError(f"non-integer token in {line.strip()!r}", lineno)


def _neighbors(
    values: Sequence[int], bound: int, what: str, lineno: int
) -> List[int]:
    # 0 is padding; indices are 1-based.
    out = []
    for v in values:
        if v == 0:
            continue
        if not 1 <= v <= bound:
            raise AlistFormatError(
                f"{what} index {v} out of range 1..{bound}", lineno
            )
        out.append(v - 1)
    if len(set(out)) != len(out):
        raise AlistFormatError(f"repeated {what} index (parallel edge)", lineno)
    return out


def parse_alist(text: str) -> ParityCheckMatrix:
    """Parse alist text into a `ParityCheckMatrix`.

    Grammar: "n m", "max_col_deg max_row_deg", the n column degrees, the m
    row degrees, n column neighbor lines and m row neighbor lines. Indices
    are 1-based and lines may be 0-padded up to the maximum degree.

    Args:
        text : alist contents

    Returns:
        The parsed matrix.

    Raises:
        AlistFormatError : on malformed headers, out-of-range indices or
            row lists that disagree with the column lists.

    """
    lines = [
        (k + 1, line) for k, line in enumerate(text.splitlines()) if line.strip()
    ]
    if len(lines) < 4:
        raise AlistFormatError("truncated header", len(lines) + 1)

    lineno, line = lines[0]
    header = _ints(line, lineno)
    if len(header) != 2 or header[0] < 1 or header[1] < 1:
        raise AlistFormatError("expected 'n m' with n, m >= 1", lineno)
    n, m = header

    lineno, line = lines[1]
    maxdeg = _ints(line, lineno)
    if len(maxdeg) != 2:
        raise AlistFormatError("expected 'max_col_deg max_row_deg'", lineno)
    max_col, max_row = maxdeg

    lineno, line = lines[2]
    col_deg = _ints(line, lineno)
    if len(col_deg) != n:
        raise AlistFormatError(f"expected {n} column degrees", lineno)
    lineno, line = lines[3]
    row_deg = _ints(line, lineno)
    if len(row_deg) != m:
        raise AlistFormatError(f"expected {m} row degrees", lineno)
    if max(col_deg) > max_col or max(row_deg) > max_row:
        raise AlistFormatError("degree exceeds declared maximum", lines[1][0])

    body = lines[4:]
    if len(body) < n + m:
        where = body[-1][0] + 1 if body else lines[3][0] + 1
        raise AlistFormatError(
            f"expected {n + m} neighbor lines, found {len(body)}", where
        )

    col_lists: List[List[int]] = []
    for j in range(n):
        lineno, line = body[j]
        nbrs = _neighbors(_ints(line, lineno), m, "check", lineno)
        if len(nbrs) != col_deg[j]:
            raise AlistFormatError(
                f"column {j + 1} lists {len(nbrs)} checks, degree says {col_deg[j]}",
                lineno,
            )
        col_lists.append(nbrs)

    entries = {(i, j) for j, nbrs in enumerate(col_lists) for i in nbrs}
    row_sets: Dict[int, set] = {i: set() for i in range(m)}
    for i, j in entries:
        row_sets[i].add(j)

    for i in range(m):
        lineno, line = body[n + i]
        nbrs = _neighbors(_ints(line, lineno), n, "variable", lineno)
        if len(nbrs) != row_deg[i]:
            raise AlistFormatError(
                f"row {i + 1} lists {len(nbrs)} variables, degree says {row_deg[i]}",
                lineno,
            )
        if set(nbrs) != row_sets[i]:
            raise AlistFormatError(
                f"row {i + 1} is inconsistent with the column lists", lineno
            )

    return ParityCheckMatrix(m, n, entries)


def emit_alist(H: ParityCheckMatrix) -> str:
    """Emit canonical alist text; lists are 0-padded to the maximum degree."""
    col_w = H.col_weights()
    row_w = H.row_weights()
    max_col = max(col_w)
    max_row = max(row_w)

    def padded(vals: Sequence[int], width: int) -> str:
        # A zero-degree line still needs one token to survive blank-line skipping.
        toks = [str(v + 1) for v in vals] + ["0"] * (max(width, 1) - len(vals))
        return " ".join(toks)

    out = [
        f"{H.n} {H.m}",
        f"{max_col} {max_row}",
        " ".join(str(w) for w in col_w),
        " ".join(str(w) for w in row_w),
    ]
    out += [padded(c, max_col) for c in H.cols]
    out += [padded(r, max_row) for r in H.rows]
    return "\n".join(out) + "\n"


def read_alist(path: str, encoding: Optional[str] = "utf-8") -> ParityCheckMatrix:
    with open(path, "r", encoding=encoding) as f:
        return parse_alist(f.read())


def write_alist(H: ParityCheckMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(emit_alist(H))
