"""Dense matrix container, column standardization, and truncated SVD.

The truncated SVD works through the smaller Gram matrix: for an n x p
matrix with p >= n the left singular vectors are eigenvectors of Y Y^T
(n x n); when n > p we diagonalize Y^T Y instead and map the right
singular vectors back through Y. This keeps the cost at O(n^2 p + n^3)
in the wide regime the package targets.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CsvFormatError, DimensionError, DomainError, NumericalError

# Columns whose sample standard deviation falls below this are treated as
# constant and zeroed out by standardize().
DEGENERATE_STD = 1e-12

# Singular values below this fraction of the largest are reported as zero.
RANK_TOL = 1e-10


@dataclass
class DataMatrix:
    """An n x p matrix of observations, rows = samples, columns = features.

    ``column_means``/``column_stds`` are populated by :func:`standardize`
    and record the statistics of the original columns; ``degenerate``
    marks columns that had (numerically) zero variance.
    """

    values: np.ndarray
    column_means: np.ndarray | None = None
    column_stds: np.ndarray | None = None
    degenerate: np.ndarray | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionError(f"expected a 2-D matrix, got ndim={values.ndim}")
        n, p = values.shape
        if n < 1 or p < 1:
            raise DimensionError(f"matrix must be at least 1x1, got {n}x{p}")
        if not np.isfinite(values).all():
            raise DomainError("matrix entries must all be finite")
        values.flags.writeable = False
        self.values = values

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def is_standardized(self) -> bool:
        return self.column_stds is not None


@dataclass
class EigenBasis:
    """Top-k left singular vectors (orthonormal columns) and singular values.

    ``rank_deficient`` is set when some of the requested singular values
    fell below ``RANK_TOL`` times the largest one; those values are
    reported as 0 and the corresponding columns are completed to an
    orthonormal set.
    """

    vectors: np.ndarray
    singular_values: np.ndarray
    rank_deficient: bool = False


def centered_sum_squares(x) -> float:
    """Sum of squared deviations from the mean, two-pass form."""
    x = np.asarray(x, dtype=np.float64)
    d = x - x.mean()
    return float(d @ d)


def centered_sum_squares_moment(x) -> float:
    """Same quantity via the moment identity sum(a^2) - m*abar^2."""
    x = np.asarray(x, dtype=np.float64)
    return float(x @ x - x.size * x.mean() ** 2)


def standardize(m: DataMatrix) -> DataMatrix:
    """Center each column and scale it to unit sample standard deviation.

    Uses the n-1 denominator. Columns with standard deviation below
    ``DEGENERATE_STD`` are set identically to zero and flagged.
    """
    n = m.rows
    if n < 2:
        raise DimensionError(f"standardize needs at least 2 rows, got {n}")
    means = m.values.mean(axis=0)
    stds = m.values.std(axis=0, ddof=1)
    degenerate = stds < DEGENERATE_STD
    safe = np.where(degenerate, 1.0, stds)
    out = (m.values - means) / safe
    if degenerate.any():
        out[:, degenerate] = 0.0
    return DataMatrix(out, column_means=means, column_stds=stds, degenerate=degenerate)


def _fix_column_signs(u: np.ndarray) -> np.ndarray:
    """Flip columns so the entry of largest magnitude (lowest row on ties)
    is nonnegative."""
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs


def _orthonormalize_columns(u: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt over the columns, completing numerically dead
    directions from the standard basis."""
    n, k = u.shape
    q = np.array(u, dtype=np.float64)
    basis_cursor = 0
    for i in range(k):
        v = q[:, i].copy()
        for j in range(i):
            v -= (q[:, j] @ v) * q[:, j]
        norm = np.linalg.norm(v)
        while norm < 1e-8:
            if basis_cursor >= n:
                raise NumericalError("could not complete an orthonormal basis")
            v = np.zeros(n)
            v[basis_cursor] = 1.0
            basis_cursor += 1
            for j in range(i):
                v -= (q[:, j] @ v) * q[:, j]
            norm = np.linalg.norm(v)
        q[:, i] = v / norm
    return q


def top_k_left_singular(m: DataMatrix, k: int) -> EigenBasis:
    """Leading k left singular vectors of the matrix, ordered by singular value.

    Sign convention: in every returned column the entry of largest
    magnitude is nonnegative, ties broken by the lowest row index.
    """
    y = m.values
    n, p = y.shape
    if not 1 <= k <= min(n, p):
        raise DimensionError(f"k={k} out of range for a {n}x{p} matrix")

    try:
        if p >= n:
            gram = y @ y.T
            eigvals, eigvecs = np.linalg.eigh(gram)
            order = np.argsort(eigvals)[::-1][:k]
            sigma = np.sqrt(np.clip(eigvals[order], 0.0, None))
            u = eigvecs[:, order]
        else:
            gram = y.T @ y
            eigvals, eigvecs = np.linalg.eigh(gram)
            order = np.argsort(eigvals)[::-1][:k]
            sigma = np.sqrt(np.clip(eigvals[order], 0.0, None))
            right = eigvecs[:, order]
            cutoff = RANK_TOL * sigma[0] if sigma[0] > 0 else 0.0
            u = np.zeros((n, k))
            for i in range(k):
                if sigma[i] > cutoff and sigma[i] > 0:
                    u[:, i] = (y @ right[:, i]) / sigma[i]
            # dead columns are filled in by the completion pass below
            u = _orthonormalize_columns(u)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge: {exc}") from exc

    cutoff = RANK_TOL * sigma[0] if sigma.size and sigma[0] > 0 else 0.0
    dead = sigma <= cutoff
    rank_deficient = bool(dead.any())
    sigma = np.where(dead, 0.0, sigma)
    if rank_deficient and p >= n:
        # eigh already returned an orthonormal set; nothing to complete
        pass
    u = _fix_column_signs(u)
    return EigenBasis(vectors=u, singular_values=sigma, rank_deficient=rank_deficient)


def _looks_numeric(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_matrix_csv(path) -> DataMatrix:
    """Read a comma-separated numeric matrix, one sample per row.

    A single header row is auto-detected: the first row is treated as a
    header iff it contains any non-numeric token. Parse failures report
    the offending row and column (1-based file coordinates).
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise CsvFormatError(f"{path}: no data rows")

    first = [t.strip() for t in lines[0].split(",")]
    start = 1 if any(not _looks_numeric(t) for t in first) else 0
    if start == 1 and len(lines) == 1:
        raise CsvFormatError(f"{path}: header only, no data rows")

    rows = []
    width = None
    for li in range(start, len(lines)):
        tokens = [t.strip() for t in lines[li].split(",")]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise CsvFormatError(
                f"{path}: row {li + 1} has {len(tokens)} fields, expected {width}"
            )
        row = np.empty(width)
        for ci, tok in enumerate(tokens):
            try:
                val = float(tok)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: row {li + 1}, column {ci + 1}: not a number: {tok!r}"
                ) from None
            if not np.isfinite(val):
                raise CsvFormatError(
                    f"{path}: row {li + 1}, column {ci + 1}: non-finite value {tok!r}"
                )
            row[ci] = val
        rows.append(row)
    return DataMatrix(np.vstack(rows))


def write_matrix_csv(path, values: np.ndarray, header: list[str] | None = None) -> None:
    """Write a matrix as CSV with round-trip-exact float formatting."""
    values = np.asarray(values)
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
