"""Integer-factorization-to-CNF encoder and model decoder.

The first 2l variables of the target memory are the factor bits, LSB first:
u is x_1..x_l and v is x_(l+1)..x_(2l), with x_l and x_(2l) the sign bits.
The encoding constrains the multiplier output to the given product bits and
adds nontriviality (each factor >= 2), nonnegativity (sign bits zero), and
the ordering circuit u - v >= 0, so models are exactly the ordered factor
pairs. All auxiliary variables are functionally determined, which keeps the
model unique when the product is a semiprime.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bitvec import BitVec, negation, product_with, sum_with, widen
from .circuits import CircuitBuilder


@dataclass(frozen=True)
class FactorizationSpec:
    """Problem statement: factor bit-length l (a power of two) and 2l product bits."""

    l: int
    product_bits: tuple[bool, ...]  # LSB first

    def __post_init__(self) -> None:
        if self.l < 2 or self.l & (self.l - 1):
            raise ValueError(f"factor length must be a power of two >= 2, got {self.l}")
        if len(self.product_bits) != 2 * self.l:
            raise ValueError(
                f"expected {2 * self.l} product bits, got {len(self.product_bits)}"
            )

    @classmethod
    def from_product(cls, l: int, product: int) -> "FactorizationSpec":
        if product < 0:
            raise ValueError("product must be nonnegative")
        if l >= 2 and product >> (2 * l):
            raise ValueError(f"product {product} needs more than {2 * l} bits")
        bits = tuple(bool((product >> i) & 1) for i in range(2 * l))
        return cls(l=l, product_bits=bits)

    @property
    def product(self) -> int:
        value = 0
        for i, bit in enumerate(self.product_bits):
            if bit:
                value |= 1 << i
        return value


def build_factorization(spec: FactorizationSpec, memory, alloc_chunk=None) -> dict:
    """Encode the factorization instance into ``memory``; returns the variable layout.

    The memory is grown to at least 2l variables; variables 1..l and l+1..2l
    become the u and v bits. Satisfying models decode to pairs (u, v) with
    u * v == product and 2 <= v <= u < 2**(l-1).
    """
    l = spec.l
    if memory.var_count < 2 * l:
        grow = getattr(memory, "reserve_variables", None) or memory.add_variables
        grow(2 * l - memory.var_count)

    ctx = CircuitBuilder(memory, alloc_chunk=alloc_chunk)
    u = BitVec.from_vars(1, l)
    v = BitVec.from_vars(l + 1, l)

    product = product_with(u, v, ctx)
    for lit, bit in zip(product, spec.product_bits):
        ctx.add_clause([lit if bit else -lit])

    # factors may not be 0 or 1: some bit above the LSB and below the sign
    for first in (1, l + 1):
        middle = list(range(first + 1, first + l - 1))
        if middle:
            ctx.add_clause(middle)
        else:
            ctx.add_clause([ctx.false_lit])

    # nonnegative factors: sign bits are zero
    ctx.add_clause([-l])
    ctx.add_clause([-2 * l])

    # ordering u - v >= 0: sign of the (l+1)-bit difference must be clear
    u_ext = widen(u, l + 1, ctx, signed=True)
    v_ext = widen(v, l + 1, ctx, signed=True)
    difference = sum_with(u_ext, negation(v_ext, ctx), ctx)
    ctx.add_clause([-difference.lits[-1]])

    ctx.finalize()
    return {
        "uVars": list(range(1, l + 1)),
        "vVars": list(range(l + 1, 2 * l + 1)),
        "varsAllocated": ctx.vars_allocated,
        "clausesAdded": ctx.clauses_added,
    }


def decode_model(model, spec: FactorizationSpec) -> tuple[int, int]:
    """Read the factor pair (u, v) out of a satisfying model."""
    l = spec.l
    if len(model) < 2 * l:
        raise ValueError(f"model has {len(model)} entries, need at least {2 * l}")
    u = sum(1 << i for i in range(l) if model[i])
    v = sum(1 << i for i in range(l) if model[l + i])
    return u, v
