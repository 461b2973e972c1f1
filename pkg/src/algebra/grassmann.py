"""
Exact arithmetic in the Grassmann (exterior) algebra over the rationals.

E has generators v1..vG. The extension F adds one more anticommuting
generator w, stored as index 0 so that every F element is an ordinary
element whose blades may contain bit 0. A blade is an int bitmask: bit i
set means generator i is present (bit 0 is w). Coefficients are
``fractions.Fraction`` so every identity check is bit-exact.
"""

import json
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from types import MappingProxyType
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from src.core.errors import AlgebraError, ConfigMismatchError, FormatError, GeneratorRangeError

Blade = int
RationalLike = Union[int, Fraction, str]

W_INDEX = 0
W_BIT = 1 << W_INDEX
# one bit for w plus 127 generator bits: a blade fits a 128-bit word
MAX_GENERATORS = 127


class Context(str, Enum):
    E = "E"
    F = "F"


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"
    ZERO = "zero"

    @property
    def is_even_like(self) -> bool:
        return self in (Parity.EVEN, Parity.ZERO)

    @property
    def is_odd_like(self) -> bool:
        return self in (Parity.ODD, Parity.ZERO)


@dataclass(frozen=True)
class AlgebraConfig:
    """Generator capacity and context (E, or F which also admits w)."""

    generator_count: int = 16
    context: Context = Context.E

    def __post_init__(self) -> None:
        if not 1 <= self.generator_count <= MAX_GENERATORS:
            raise GeneratorRangeError(
                f"generator_count must be in 1..{MAX_GENERATORS}, got {self.generator_count}"
            )

    @property
    def capacity_mask(self) -> int:
        mask = ((1 << self.generator_count) - 1) << 1
        if self.context is Context.F:
            mask |= W_BIT
        return mask

    def as_f(self) -> "AlgebraConfig":
        return AlgebraConfig(self.generator_count, Context.F)

    def as_e(self) -> "AlgebraConfig":
        return AlgebraConfig(self.generator_count, Context.E)

    def check_blade(self, blade: Blade) -> None:
        if blade < 0 or blade & ~self.capacity_mask:
            raise GeneratorRangeError(
                f"blade {blade_indices(blade) if blade >= 0 else blade} is outside "
                f"{self.context.value} with {self.generator_count} generators"
            )


# ---------------------------------------------------------------- blades


def blade_from_indices(indices: Iterable[int]) -> Blade:
    """Blade of a set of distinct generator indices (0 is w)."""
    blade = 0
    for index in indices:
        if index < 0:
            raise GeneratorRangeError(f"negative generator index {index}")
        bit = 1 << index
        if blade & bit:
            raise AlgebraError(f"generator index {index} repeated in blade")
        blade |= bit
    return blade


def blade_indices(blade: Blade) -> Tuple[int, ...]:
    """Ascending generator indices of a blade."""
    indices = []
    position = 0
    while blade:
        if blade & 1:
            indices.append(position)
        blade >>= 1
        position += 1
    return tuple(indices)


def blade_degree(blade: Blade) -> int:
    return bin(blade).count("1")


def blade_sort_key(blade: Blade) -> Tuple[int, Tuple[int, ...]]:
    """Canonical order: degree first, then the ascending index sequence."""
    return blade_degree(blade), blade_indices(blade)


@lru_cache(maxsize=1 << 16)
def reordering_sign(a: Blade, b: Blade) -> int:
    """(-1)^#{(i, j) : i in a, j in b, i > j}."""
    swaps = 0
    a >>= 1
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def blade_mul(a: Blade, b: Blade) -> Optional[Tuple[int, Blade]]:
    """Product of two blades: ``None`` when they share a generator, else (sign, union)."""
    if a & b:
        return None
    return reordering_sign(a, b), a | b


def blade_name(blade: Blade) -> str:
    if not blade:
        return "1"
    return "^".join("w" if i == W_INDEX else f"v{i}" for i in blade_indices(blade))


# ---------------------------------------------------------------- elements


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise AlgebraError("booleans are not coefficients")
    if isinstance(value, (int, Fraction, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise FormatError(f"not a rational number: {value!r}") from e
    raise AlgebraError(f"coefficients must be exact rationals, got {type(value).__name__}")


class GrassmannElement:
    """
    Immutable exact rational combination of blades under one AlgebraConfig.

    Zero coefficients are never stored; the empty map is zero.
    """

    __slots__ = ("_config", "_terms", "_hash")

    def __init__(self, config: AlgebraConfig, terms: Optional[Mapping[Blade, Any]] = None):
        cleaned: Dict[Blade, Fraction] = {}
        for blade, coeff in (terms or {}).items():
            config.check_blade(blade)
            q = _to_fraction(coeff)
            if q:
                cleaned[blade] = q
        self._config = config
        self._terms = cleaned
        self._hash: Optional[int] = None

    @classmethod
    def _from_clean(cls, config: AlgebraConfig, terms: Dict[Blade, Fraction]) -> "GrassmannElement":
        element = cls.__new__(cls)
        element._config = config
        element._terms = terms
        element._hash = None
        return element

    # -- constructors

    @classmethod
    def zero(cls, config: AlgebraConfig) -> "GrassmannElement":
        return cls._from_clean(config, {})

    @classmethod
    def one(cls, config: AlgebraConfig) -> "GrassmannElement":
        return cls._from_clean(config, {0: Fraction(1)})

    @classmethod
    def scalar(cls, config: AlgebraConfig, value: RationalLike) -> "GrassmannElement":
        q = _to_fraction(value)
        return cls._from_clean(config, {0: q} if q else {})

    @classmethod
    def generator(cls, config: AlgebraConfig, index: int) -> "GrassmannElement":
        """v_index, or w for index 0 (F only)."""
        return cls(config, {blade_from_indices([index]): 1})

    @classmethod
    def w(cls, config: AlgebraConfig) -> "GrassmannElement":
        return cls.generator(config.as_f(), W_INDEX)

    @classmethod
    def from_terms(
        cls, config: AlgebraConfig, terms: Iterable[Tuple[Iterable[int], RationalLike]]
    ) -> "GrassmannElement":
        """Build from (generator indices, coefficient) pairs; indices need not be sorted."""
        acc: Dict[Blade, Fraction] = {}
        for indices, coeff in terms:
            product = GrassmannElement.one(config)
            for index in indices:
                product = product * GrassmannElement.generator(config, index)
            for blade, c in product._terms.items():
                acc[blade] = acc.get(blade, Fraction(0)) + c * _to_fraction(coeff)
        return cls(config, acc)

    # -- accessors

    @property
    def config(self) -> AlgebraConfig:
        return self._config

    @property
    def terms(self) -> Mapping[Blade, Fraction]:
        return MappingProxyType(self._terms)

    def sorted_terms(self) -> List[Tuple[Blade, Fraction]]:
        return sorted(self._terms.items(), key=lambda item: blade_sort_key(item[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[Blade, Fraction]]:
        return iter(self.sorted_terms())

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_scalar(self) -> bool:
        return all(blade == 0 for blade in self._terms)

    @property
    def scalar_part(self) -> Fraction:
        return self._terms.get(0, Fraction(0))

    @property
    def max_degree(self) -> int:
        """Largest blade degree, -1 for zero."""
        return max((blade_degree(b) for b in self._terms), default=-1)

    @property
    def in_e(self) -> bool:
        """True when no term contains w."""
        return all(not blade & W_BIT for blade in self._terms)

    def parity(self) -> Parity:
        if not self._terms:
            return Parity.ZERO
        parities = {blade_degree(b) & 1 for b in self._terms}
        if parities == {0}:
            return Parity.EVEN
        if parities == {1}:
            return Parity.ODD
        return Parity.MIXED

    # -- arithmetic

    def _coerce(self, other: Any) -> Optional["GrassmannElement"]:
        if isinstance(other, GrassmannElement):
            if other._config != self._config:
                raise ConfigMismatchError(f"{self._config} vs {other._config}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return GrassmannElement.scalar(self._config, other)
        return None

    def __add__(self, other: Any) -> "GrassmannElement":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out = dict(self._terms)
        for blade, coeff in rhs._terms.items():
            value = out.get(blade, 0) + coeff
            if value:
                out[blade] = value
            else:
                out.pop(blade, None)
        return GrassmannElement._from_clean(self._config, out)

    __radd__ = __add__

    def __neg__(self) -> "GrassmannElement":
        return GrassmannElement._from_clean(self._config, {b: -c for b, c in self._terms.items()})

    def __sub__(self, other: Any) -> "GrassmannElement":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: Any) -> "GrassmannElement":
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs - self

    def scale(self, factor: RationalLike) -> "GrassmannElement":
        q = _to_fraction(factor)
        if not q:
            return GrassmannElement.zero(self._config)
        return GrassmannElement._from_clean(self._config, {b: c * q for b, c in self._terms.items()})

    def __mul__(self, other: Any) -> "GrassmannElement":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out: Dict[Blade, Fraction] = {}
        for a, ca in self._terms.items():
            for b, cb in rhs._terms.items():
                if a & b:
                    continue
                coeff = ca * cb
                if reordering_sign(a, b) < 0:
                    coeff = -coeff
                key = a | b
                value = out.get(key, 0) + coeff
                if value:
                    out[key] = value
                else:
                    out.pop(key, None)
        return GrassmannElement._from_clean(self._config, out)

    def __rmul__(self, other: Any) -> "GrassmannElement":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other: Any) -> "GrassmannElement":
        q = _to_fraction(other)
        if not q:
            raise ZeroDivisionError("division of a Grassmann element by zero")
        return self.scale(1 / q)

    # -- comparison

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GrassmannElement):
            return self._config == other._config and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_scalar and self.scalar_part == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_scalar:
                # equal to the int or Fraction it compares equal to
                self._hash = hash(self.scalar_part)
            else:
                self._hash = hash((self._config, frozenset(self._terms.items())))
        return self._hash

    # -- E / F plumbing

    def embed(self) -> "GrassmannElement":
        """The same element viewed in F."""
        if self._config.context is Context.F:
            return self
        return GrassmannElement._from_clean(self._config.as_f(), dict(self._terms))

    def restrict(self) -> "GrassmannElement":
        """The same element viewed in E; it must not contain w."""
        if not self.in_e:
            raise GeneratorRangeError("element contains w and does not lie in E")
        return GrassmannElement._from_clean(self._config.as_e(), dict(self._terms))

    def decompose_w(self) -> Tuple["GrassmannElement", "GrassmannElement"]:
        """
        Unique (alpha, beta) in E with self = alpha + w * beta.

        w is the smallest index, so factoring it out on the left leaves the
        coefficients of the w-terms unchanged.
        """
        e_config = self._config.as_e()
        alpha: Dict[Blade, Fraction] = {}
        beta: Dict[Blade, Fraction] = {}
        for blade, coeff in self._terms.items():
            if blade & W_BIT:
                beta[blade & ~W_BIT] = coeff
            else:
                alpha[blade] = coeff
        return (
            GrassmannElement._from_clean(e_config, alpha),
            GrassmannElement._from_clean(e_config, beta),
        )

    # -- serialization

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts: List[str] = []
        for i, (blade, coeff) in enumerate(self.sorted_terms()):
            magnitude = abs(coeff)
            body = str(magnitude) if blade == 0 else f"{magnitude} * {blade_name(blade)}"
            if i == 0:
                parts.append(f"-{body}" if coeff < 0 else body)
            else:
                parts.append(f" - {body}" if coeff < 0 else f" + {body}")
        return "".join(parts)

    def to_json(self) -> Dict[str, Any]:
        return {
            "terms": [
                {"blade": list(blade_indices(blade)), "coeff": str(coeff)}
                for blade, coeff in self.sorted_terms()
            ]
        }

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"GrassmannElement({self.to_text()!r}, G={self._config.generator_count}, {self._config.context.value})"


# ---------------------------------------------------------------- parsing

_GENERATOR = re.compile(r"^(?:w|v(\d+))$")


def _parse_blade_word(config: AlgebraConfig, word: str) -> GrassmannElement:
    element = GrassmannElement.one(config)
    for token in word.split("^"):
        token = token.strip()
        match = _GENERATOR.match(token)
        if not match:
            raise FormatError(f"not a generator: {token!r}")
        index = W_INDEX if match.group(1) is None else int(match.group(1))
        element = element * GrassmannElement.generator(config, index)
    return element


def _parse_term(config: AlgebraConfig, body: str) -> GrassmannElement:
    pieces = [p.strip() for p in body.split("*")]
    if len(pieces) == 2:
        return _parse_blade_word(config, pieces[1]).scale(_to_fraction(pieces[0]))
    if len(pieces) == 1:
        if pieces[0][:1] in ("w", "v"):
            return _parse_blade_word(config, pieces[0])
        return GrassmannElement.scalar(config, pieces[0])
    raise FormatError(f"malformed term: {body!r}")


def parse_text(config: AlgebraConfig, text: str) -> GrassmannElement:
    """Parse the text form, e.g. ``1 - 3/2 * v1^v3 + 2 * w^v2``."""
    parts = re.split(r"([+-])", text.strip())
    pending: List[Tuple[int, str]] = []
    if parts[0].strip():
        pending.append((1, parts[0].strip()))
    for i in range(1, len(parts), 2):
        body = parts[i + 1].strip()
        if not body:
            raise FormatError(f"dangling sign in {text!r}")
        pending.append((-1 if parts[i] == "-" else 1, body))
    if not pending:
        raise FormatError("empty element text")
    result = GrassmannElement.zero(config)
    for sign, body in pending:
        term = _parse_term(config, body)
        result = result + (term if sign > 0 else -term)
    return result


def from_json(config: AlgebraConfig, data: Mapping[str, Any]) -> GrassmannElement:
    try:
        entries = data["terms"]
        return GrassmannElement.from_terms(config, ((t["blade"], t["coeff"]) for t in entries))
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed element JSON: {data!r}") from e


def parse_element(config: AlgebraConfig, source: Union[str, Mapping[str, Any], int, Fraction]) -> GrassmannElement:
    """Accepts the text form, the JSON form (as text or mapping) or a bare rational."""
    if isinstance(source, GrassmannElement):
        return source
    if isinstance(source, Mapping):
        return from_json(config, source)
    if isinstance(source, (int, Fraction)):
        return GrassmannElement.scalar(config, source)
    text = source.strip()
    if text.startswith("{"):
        try:
            return from_json(config, json.loads(text))
        except json.JSONDecodeError as e:
            raise FormatError(f"malformed element JSON: {e}") from e
    return parse_text(config, text)


# ---------------------------------------------------------------- operations


def add(x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    return x + y


def mul(x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    return x * y


def parity(x: GrassmannElement) -> Parity:
    return x.parity()


def decompose_w(value: GrassmannElement) -> Tuple[GrassmannElement, GrassmannElement]:
    return value.decompose_w()


def embed_e_in_f(x: GrassmannElement) -> GrassmannElement:
    return x.embed()


def lift_scalar(config: AlgebraConfig, value: RationalLike) -> GrassmannElement:
    return GrassmannElement.scalar(config, value)


def sum_elements(config: AlgebraConfig, elements: Iterable[GrassmannElement]) -> GrassmannElement:
    """Sum with a single pruning pass at the end."""
    acc: Dict[Blade, Fraction] = {}
    for element in elements:
        if element.config != config:
            raise ConfigMismatchError(f"{config} vs {element.config}")
        for blade, coeff in element._terms.items():
            acc[blade] = acc.get(blade, 0) + coeff
    return GrassmannElement._from_clean(config, {b: c for b, c in acc.items() if c})
