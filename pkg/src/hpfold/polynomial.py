"""Multilinear polynomials over named binary variables.

Variables are non-negative integer indices. Because every variable takes
values in {0, 1}, repeated factors collapse (x*x == x), so each term is a
set of distinct variable indices. The empty set holds the constant term.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping

# Coefficients below this magnitude are dropped on construction.
PRUNE_THRESHOLD = 1e-12


class BinaryPolynomial:
    """Immutable real-coefficient multilinear polynomial over {0,1} variables."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[frozenset[int], float] | None = None):
        cleaned: dict[frozenset[int], float] = {}
        if terms:
            for key, coeff in terms.items():
                if abs(coeff) > PRUNE_THRESHOLD:
                    cleaned[frozenset(key)] = float(coeff)
        self._terms = cleaned

    @classmethod
    def constant(cls, value: float) -> "BinaryPolynomial":
        return cls({frozenset(): value})

    @classmethod
    def variable(cls, index: int) -> "BinaryPolynomial":
        if index < 0:
            raise ValueError(f"variable index must be non-negative, got {index}")
        return cls({frozenset((index,)): 1.0})

    @property
    def terms(self) -> dict[frozenset[int], float]:
        return dict(self._terms)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        """Terms keyed by sorted variable tuples, for readable comparisons."""
        return {tuple(sorted(k)): v for k, v in self._terms.items()}

    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def coefficient(self, variables: Iterable[int] = ()) -> float:
        return self._terms.get(frozenset(variables), 0.0)

    def variables(self) -> set[int]:
        out: set[int] = set()
        for key in self._terms:
            out.update(key)
        return out

    def is_zero(self) -> bool:
        return not self._terms

    def evaluate(self, bits) -> float:
        """Evaluate at a full assignment, bits[i] being the value of variable i."""
        needed = self.variables()
        if needed and max(needed) >= len(bits):
            raise ValueError(
                f"assignment covers {len(bits)} variables but the polynomial "
                f"uses index {max(needed)}"
            )
        total = 0.0
        for key, coeff in self._terms.items():
            prod = coeff
            for idx in key:
                if not bits[idx]:
                    prod = 0.0
                    break
            total += prod
        return total

    def __add__(self, other) -> "BinaryPolynomial":
        if isinstance(other, (int, float)):
            other = BinaryPolynomial.constant(other)
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        merged = dict(self._terms)
        for key, coeff in other._terms.items():
            merged[key] = merged.get(key, 0.0) + coeff
        return BinaryPolynomial(merged)

    __radd__ = __add__

    def __sub__(self, other) -> "BinaryPolynomial":
        return self + (-1.0) * other

    def __rsub__(self, other) -> "BinaryPolynomial":
        return (-1.0) * self + other

    def __neg__(self) -> "BinaryPolynomial":
        return (-1.0) * self

    def __mul__(self, other) -> "BinaryPolynomial":
        if isinstance(other, (int, float)):
            return BinaryPolynomial({k: v * other for k, v in self._terms.items()})
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        product: dict[frozenset[int], float] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                key = k1 | k2  # x*x == x
                product[key] = product.get(key, 0.0) + c1 * c2
        return BinaryPolynomial(product)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self) -> str:
        if not self._terms:
            return "BinaryPolynomial(0)"
        parts = []
        for key in sorted(self._terms, key=lambda k: (len(k), sorted(k))):
            coeff = self._terms[key]
            if key:
                mono = "*".join(f"x{i}" for i in sorted(key))
                parts.append(f"{coeff:+g}*{mono}")
            else:
                parts.append(f"{coeff:+g}")
        return f"BinaryPolynomial({' '.join(parts)})"
