from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import List, Optional, Sequence, Tuple

from sympy.combinatorics import Permutation

from src.algebra.grassmann import AlgebraConfig, GrassmannElement, sum_elements
from src.algebra.supermatrix import MatrixE, mat_powers, trace
from src.core.errors import (
    AlgebraError,
    ConfigMismatchError,
    IdentityViolationError,
    ParityError,
    ShapeError,
    UnsupportedSizeError,
)
from src.core.logging_config import LoggerMixin

ORACLE_MAX_SIZE = 5


@dataclass(frozen=True)
class CharPoly:
    """
    Monic characteristic polynomial lambda_0 + lambda_1 x + ... + x^n.

    Coefficients are even (or zero) elements, so they commute with
    everything the polynomial is evaluated on.
    """

    coeffs: Tuple[GrassmannElement, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) < 2:
            raise ShapeError("a characteristic polynomial has degree n >= 1")
        config = self.coeffs[0].config
        if any(c.config != config for c in self.coeffs):
            raise ConfigMismatchError("coefficients built under different configs")
        if self.coeffs[-1] != 1:
            raise ShapeError("characteristic polynomials are monic")
        if not all(c.parity().is_even_like for c in self.coeffs):
            raise ParityError("characteristic polynomial coefficients must be even")

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @property
    def config(self) -> AlgebraConfig:
        return self.coeffs[0].config

    def __getitem__(self, k: int) -> GrassmannElement:
        return self.coeffs[k]

    def determinant(self) -> GrassmannElement:
        """det(H) = (-1)^n lambda_0."""
        return self.coeffs[0] if self.n % 2 == 0 else -self.coeffs[0]

    def __mul__(self, other: "CharPoly") -> "CharPoly":
        if not isinstance(other, CharPoly):
            return NotImplemented
        product = _poly_mul(list(self.coeffs), list(other.coeffs), self.config)
        return CharPoly(tuple(product))

    def to_text(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            power = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            parts.append(f"({c})" + (f"*{power}" if power else ""))
        return " + ".join(parts)


def _poly_mul(
    p: Sequence[GrassmannElement], q: Sequence[GrassmannElement], config: AlgebraConfig
) -> List[GrassmannElement]:
    out = [GrassmannElement.zero(config) for _ in range(len(p) + len(q) - 1)]
    for i, a in enumerate(p):
        if a.is_zero:
            continue
        for j, b in enumerate(q):
            if not b.is_zero:
                out[i + j] = out[i + j] + a * b
    return out


def _require_even(h: MatrixE) -> None:
    if not h.parity().is_even_like:
        raise ParityError(
            f"characteristic polynomials need commuting (even) entries, matrix is {h.parity().value}"
        )


def power_traces(h: MatrixE, upto: Optional[int] = None) -> List[GrassmannElement]:
    """[tr(H^0), tr(H^1), ..., tr(H^upto)] with upto defaulting to n."""
    upto = h.n if upto is None else upto
    return [trace(p) for p in mat_powers(h, upto)]


def faddeev_leverrier(
    h: MatrixE, *, traces: Optional[Sequence[GrassmannElement]] = None
) -> CharPoly:
    """
    Descending Faddeev-LeVerrier recursion

        lambda_n = 1,  lambda_k = -1/(n-k) * sum_{i=1}^{n-k} lambda_{k+i} tr(H^i).

    ``traces`` may supply precomputed tr(H^i), indexed by i (index 0 unused).
    """
    _require_even(h)
    n = h.n
    if traces is None:
        traces = power_traces(h, n)
    elif len(traces) < n + 1:
        raise ShapeError(f"need tr(H^i) for i <= {n}, got {len(traces) - 1}")

    lam: List[GrassmannElement] = [GrassmannElement.zero(h.config)] * (n + 1)
    lam[n] = GrassmannElement.one(h.config)
    for k in range(n - 1, -1, -1):
        m = n - k
        acc = sum_elements(h.config, (lam[k + i] * traces[i] for i in range(1, m + 1)))
        lam[k] = acc.scale(Fraction(-1, m))
    return CharPoly(tuple(lam))


def charpoly_oracle(h: MatrixE) -> CharPoly:
    """
    det(xI - H) by Leibniz expansion over E_0[x].

    Independent of the recursion; only meant for small n.
    """
    _require_even(h)
    n = h.n
    if n > ORACLE_MAX_SIZE:
        raise UnsupportedSizeError(f"oracle expansion is limited to n <= {ORACLE_MAX_SIZE}")
    config = h.config
    one = GrassmannElement.one(config)

    def entry(i: int, j: int) -> List[GrassmannElement]:
        # (xI - H)_{ij} as a coefficient list in x
        if i == j:
            return [-h[i, j], one]
        return [-h[i, j]]

    total = [GrassmannElement.zero(config) for _ in range(n + 1)]
    for perm in permutations(range(n)):
        sign = Permutation(list(perm)).signature()
        product = [one]
        for i, j in enumerate(perm):
            product = _poly_mul(product, entry(i, j), config)
        for k, c in enumerate(product):
            total[k] = total[k] + c.scale(sign)
    return CharPoly(tuple(total))


def eval_poly(p: CharPoly, m: MatrixE) -> MatrixE:
    """sum_k lambda_k M^k with M^0 = I; coefficients act on the left."""
    if p.config != m.config:
        raise ConfigMismatchError(f"{p.config} vs {m.config}")
    if p.n != m.n:
        raise ShapeError(f"degree {p.n} polynomial evaluated on a {m.n} x {m.n} matrix")
    powers = mat_powers(m, p.n)
    result = powers[0].scale(p.coeffs[0])
    for k in range(1, p.n + 1):
        if not p.coeffs[k].is_zero:
            result = result + powers[k].scale(p.coeffs[k])
    return result


class CharPolyService(LoggerMixin):
    """Characteristic polynomials of even matrices, optionally cross-checked."""

    def characteristic_polynomial(self, h: MatrixE, *, check: bool = False) -> CharPoly:
        """
        Faddeev-LeVerrier on ``h``.

        With ``check`` the result must match the Leibniz expansion (for
        n <= ORACLE_MAX_SIZE) and p_H(H) must vanish; a mismatch raises
        IdentityViolationError.
        """
        try:
            p = faddeev_leverrier(h)
            if check:
                self._check(h, p)
            self.logger.debug(f"Characteristic polynomial of a {h.n} x {h.n} matrix computed")
            return p
        except AlgebraError as e:
            self.logger.error(f"Error computing characteristic polynomial: {str(e)}")
            raise

    def determinant(self, h: MatrixE) -> GrassmannElement:
        return self.characteristic_polynomial(h).determinant()

    def _check(self, h: MatrixE, p: CharPoly) -> None:
        if h.n <= ORACLE_MAX_SIZE and charpoly_oracle(h) != p:
            raise IdentityViolationError("Faddeev-LeVerrier disagrees with the Leibniz expansion")
        residual = eval_poly(p, h)
        if not residual.is_zero():
            row, column, element = residual.nonzero_entries()[0]
            raise IdentityViolationError(
                f"p_H(H) is nonzero at ({row}, {column}): {element}",
                witness={"matrix": h.to_json(), "row": row, "column": column, "element": str(element)},
            )
