"""Square matrices over E and F with exact Grassmann entries."""

import json
import re
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from src.algebra.grassmann import (
    AlgebraConfig,
    Context,
    GrassmannElement,
    Parity,
    blade_indices,
    parse_element,
    sum_elements,
)
from src.core.errors import ConfigMismatchError, FormatError, ShapeError

EntryLike = Union[GrassmannElement, int, Fraction, str, Mapping[str, Any]]


class MatrixE:
    """
    Immutable n x n matrix whose entries share one AlgebraConfig.

    Homogeneity is not enforced here; operations that need an even or odd
    matrix check ``parity()`` themselves.
    """

    __slots__ = ("_config", "_rows", "_hash")

    def __init__(self, config: AlgebraConfig, rows: Sequence[Sequence[EntryLike]]):
        n = len(rows)
        if n < 1:
            raise ShapeError("matrices must be at least 1 x 1")
        built: List[Tuple[GrassmannElement, ...]] = []
        for row in rows:
            if len(row) != n:
                raise ShapeError(f"row of length {len(row)} in a {n} x {n} matrix")
            entries = []
            for value in row:
                element = parse_element(config, value)
                if element.config != config:
                    raise ConfigMismatchError(f"entry built under {element.config}, matrix under {config}")
                entries.append(element)
            built.append(tuple(entries))
        self._config = config
        self._rows = tuple(built)
        self._hash: Optional[int] = None

    @classmethod
    def _from_rows(cls, config: AlgebraConfig, rows: Tuple[Tuple[GrassmannElement, ...], ...]) -> "MatrixE":
        matrix = cls.__new__(cls)
        matrix._config = config
        matrix._rows = rows
        matrix._hash = None
        return matrix

    # -- accessors

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def config(self) -> AlgebraConfig:
        return self._config

    @property
    def rows(self) -> Tuple[Tuple[GrassmannElement, ...], ...]:
        return self._rows

    def __getitem__(self, index: Tuple[int, int]) -> GrassmannElement:
        i, j = index
        return self._rows[i][j]

    def entries(self) -> Iterator[Tuple[int, int, GrassmannElement]]:
        for i, row in enumerate(self._rows):
            for j, value in enumerate(row):
                yield i, j, value

    def parity(self) -> Parity:
        seen = set()
        for _, _, value in self.entries():
            p = value.parity()
            if p is Parity.MIXED:
                return Parity.MIXED
            if p is not Parity.ZERO:
                seen.add(p)
        if not seen:
            return Parity.ZERO
        if len(seen) == 2:
            return Parity.MIXED
        return seen.pop()

    def is_zero(self) -> bool:
        return all(value.is_zero for _, _, value in self.entries())

    def nonzero_entries(self) -> List[Tuple[int, int, GrassmannElement]]:
        return [(i, j, value) for i, j, value in self.entries() if not value.is_zero]

    def scalar_value(self) -> Optional[GrassmannElement]:
        """lambda when the matrix equals lambda * I, else None."""
        diagonal = self._rows[0][0]
        for i, j, value in self.entries():
            if i == j and value != diagonal:
                return None
            if i != j and not value.is_zero:
                return None
        return diagonal

    def is_scalar_matrix(self) -> bool:
        return self.scalar_value() is not None

    # -- arithmetic

    def _check(self, other: "MatrixE") -> None:
        if other.n != self.n:
            raise ShapeError(f"{self.n} x {self.n} vs {other.n} x {other.n}")
        if other._config != self._config:
            raise ConfigMismatchError(f"{self._config} vs {other._config}")

    def __add__(self, other: "MatrixE") -> "MatrixE":
        if not isinstance(other, MatrixE):
            return NotImplemented
        self._check(other)
        return MatrixE._from_rows(
            self._config,
            tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self._rows, other._rows)),
        )

    def __neg__(self) -> "MatrixE":
        return MatrixE._from_rows(self._config, tuple(tuple(-a for a in row) for row in self._rows))

    def __sub__(self, other: "MatrixE") -> "MatrixE":
        if not isinstance(other, MatrixE):
            return NotImplemented
        return self + (-other)

    def __matmul__(self, other: "MatrixE") -> "MatrixE":
        if not isinstance(other, MatrixE):
            return NotImplemented
        self._check(other)
        n = self.n
        columns = list(zip(*other._rows))
        rows = []
        for i in range(n):
            row = self._rows[i]
            rows.append(
                tuple(
                    sum_elements(
                        self._config,
                        (a * b for a, b in zip(row, columns[j]) if a and b),
                    )
                    for j in range(n)
                )
            )
        return MatrixE._from_rows(self._config, tuple(rows))

    def scale(self, factor: Union[GrassmannElement, int, Fraction]) -> "MatrixE":
        """Left multiplication factor * M."""
        if isinstance(factor, GrassmannElement) and factor.config != self._config:
            raise ConfigMismatchError(f"{factor.config} vs {self._config}")
        if not isinstance(factor, GrassmannElement):
            factor = GrassmannElement.scalar(self._config, factor)
        return MatrixE._from_rows(self._config, tuple(tuple(factor * a for a in row) for row in self._rows))

    def __rmul__(self, factor: Any) -> "MatrixE":
        if isinstance(factor, (GrassmannElement, int, Fraction)) and not isinstance(factor, bool):
            return self.scale(factor)
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixE):
            return NotImplemented
        return self._config == other._config and self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._config, self._rows))
        return self._hash

    # -- E / F

    def embed(self) -> "MatrixE":
        if self._config.context is Context.F:
            return self
        return MatrixE._from_rows(self._config.as_f(), tuple(tuple(a.embed() for a in row) for row in self._rows))

    # -- serialization

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "generator_count": self._config.generator_count,
            "context": self._config.context.value,
            "entries": [[value.to_json() for value in row] for row in self._rows],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in self._rows) + "]"

    def __repr__(self) -> str:
        return f"MatrixE({self})"


# ---------------------------------------------------------------- constructors


def identity_matrix(n: int, config: AlgebraConfig) -> MatrixE:
    one = GrassmannElement.one(config)
    zero = GrassmannElement.zero(config)
    return MatrixE._from_rows(config, tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))


def zero_matrix(n: int, config: AlgebraConfig) -> MatrixE:
    zero = GrassmannElement.zero(config)
    return MatrixE._from_rows(config, tuple(tuple(zero for _ in range(n)) for _ in range(n)))


def scalar_matrix(value: GrassmannElement, n: int) -> MatrixE:
    return identity_matrix(n, value.config).scale(value)


def diag(config: AlgebraConfig, values: Sequence[EntryLike]) -> MatrixE:
    n = len(values)
    return MatrixE(config, [[values[i] if i == j else 0 for j in range(n)] for i in range(n)])


def block_diag(first: MatrixE, second: MatrixE) -> MatrixE:
    if first.config != second.config:
        raise ConfigMismatchError(f"{first.config} vs {second.config}")
    n = first.n + second.n
    zero = GrassmannElement.zero(first.config)
    rows = [[zero] * n for _ in range(n)]
    for i, j, value in first.entries():
        rows[i][j] = value
    for i, j, value in second.entries():
        rows[first.n + i][first.n + j] = value
    return MatrixE._from_rows(first.config, tuple(tuple(row) for row in rows))


def matrix_from_json(data: Union[str, Mapping[str, Any]], config: Optional[AlgebraConfig] = None) -> MatrixE:
    """
    Load ``{"n": 2, "entries": [[<element>, ...], ...]}``.

    The config comes from the argument, else from the optional
    ``generator_count``/``context`` fields, else from the largest index used.
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise FormatError(f"malformed matrix JSON: {e}") from e
    try:
        n = int(data["n"])
        entries = list(data["entries"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError("matrix JSON needs 'n' and 'entries'") from e
    if len(entries) != n:
        raise ShapeError(f"'n' is {n} but {len(entries)} rows were given")
    if config is None:
        try:
            context = Context(data.get("context", "E"))
        except ValueError as e:
            raise FormatError(f"unknown context {data.get('context')!r}") from e
        count = data.get("generator_count")
        if count is None:
            count = max([1] + [_max_index(value) for row in entries for value in row])
        config = AlgebraConfig(int(count), context)
    return MatrixE(config, entries)


def _max_index(value: Any) -> int:
    if isinstance(value, Mapping):
        return max([0] + [max(t["blade"], default=0) for t in value.get("terms", [])])
    if isinstance(value, str):
        return max([0] + [int(i) for i in re.findall(r"v(\d+)", value)])
    return 0


# ---------------------------------------------------------------- operations


def mat_add(x: MatrixE, y: MatrixE) -> MatrixE:
    return x + y


def mat_sub(x: MatrixE, y: MatrixE) -> MatrixE:
    return x - y


def mat_mul(x: MatrixE, y: MatrixE) -> MatrixE:
    return x @ y


def mat_scalar_mul(factor: Union[GrassmannElement, int, Fraction], m: MatrixE) -> MatrixE:
    return m.scale(factor)


def mat_pow(m: MatrixE, k: int) -> MatrixE:
    """Iterated multiplication; mat_pow(M, 0) is the identity."""
    if k < 0:
        raise ShapeError("negative matrix powers are not defined")
    result = identity_matrix(m.n, m.config)
    for _ in range(k):
        result = result @ m
    return result


def mat_powers(m: MatrixE, upto: int) -> List[MatrixE]:
    """[M^0, M^1, ..., M^upto]."""
    powers = [identity_matrix(m.n, m.config)]
    for _ in range(upto):
        powers.append(powers[-1] @ m)
    return powers


def trace(m: MatrixE) -> GrassmannElement:
    return sum_elements(m.config, (m[i, i] for i in range(m.n)))


def parity_of_matrix(m: MatrixE) -> Parity:
    return m.parity()


def embed_matrix(m: MatrixE) -> MatrixE:
    return m.embed()


def max_generator_index(m: MatrixE) -> int:
    return max([0] + [max(blade_indices(b), default=0) for _, _, v in m.entries() for b in v.terms])


def trace_of_product(x: MatrixE, y: MatrixE) -> GrassmannElement:
    """tr(XY) from the diagonal of XY only."""
    x._check(y)
    return sum_elements(x.config, (x[i, j] * y[j, i] for i in range(x.n) for j in range(x.n)))
