"""Boolean expression DAGs and their equisatisfiable CNF lowering.

Lowering follows a fixed pipeline: auxiliary connectives are rewritten into
And/Or/Not, negations are pushed to the leaves (De Morgan), inner
conjunctions/disjunctions get fresh definition variables, definitions with
more than two literals on the right are split into binary ones, and each
binary definition is expanded into clauses by truth table. Every definition
is a full equivalence, so CNF models extend formula models uniquely.
"""

from __future__ import annotations

from typing import Iterable, Sequence

VAR = "VAR"
CONST = "CONST"
NOT = "NOT"
AND = "AND"
OR = "OR"
XOR = "XOR"
MAJ3 = "MAJ3"
IMPL = "IMPL"
EQUIV = "EQUIV"

_ARITY = {NOT: 1, XOR: 2, IMPL: 2, EQUIV: 2, MAJ3: 3}


class ExprNode:
    """One node of a Boolean expression DAG (children may be shared)."""

    __slots__ = ("kind", "children", "var_index", "bool_value")

    def __init__(self, kind, children=(), var_index=None, bool_value=None):
        if kind in _ARITY and len(children) != _ARITY[kind]:
            raise ValueError(f"{kind} expects {_ARITY[kind]} children, got {len(children)}")
        if kind in (AND, OR) and len(children) < 2:
            raise ValueError(f"{kind} expects at least 2 children")
        if kind == VAR and (not isinstance(var_index, int) or var_index < 1):
            raise ValueError(f"bad variable index: {var_index!r}")
        self.kind = kind
        self.children = tuple(children)
        self.var_index = var_index
        self.bool_value = bool_value

    @classmethod
    def var(cls, index: int) -> "ExprNode":
        return cls(VAR, var_index=index)

    @classmethod
    def const(cls, value: bool) -> "ExprNode":
        return cls(CONST, bool_value=bool(value))

    @classmethod
    def not_(cls, a) -> "ExprNode":
        return cls(NOT, (a,))

    @classmethod
    def and_(cls, *children) -> "ExprNode":
        return cls(AND, children)

    @classmethod
    def or_(cls, *children) -> "ExprNode":
        return cls(OR, children)

    @classmethod
    def xor(cls, a, b) -> "ExprNode":
        return cls(XOR, (a, b))

    @classmethod
    def maj3(cls, a, b, c) -> "ExprNode":
        return cls(MAJ3, (a, b, c))

    @classmethod
    def impl(cls, a, b) -> "ExprNode":
        return cls(IMPL, (a, b))

    @classmethod
    def equiv(cls, a, b) -> "ExprNode":
        return cls(EQUIV, (a, b))

    def max_var(self) -> int:
        """Largest variable index appearing in the DAG (0 when none)."""
        best = 0
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if node.kind == VAR:
                best = max(best, node.var_index)
            stack.extend(node.children)
        return best

    def __repr__(self) -> str:
        if self.kind == VAR:
            return f"x{self.var_index}"
        if self.kind == CONST:
            return "T" if self.bool_value else "F"
        return f"{self.kind}({', '.join(map(repr, self.children))})"


def eval_expr(node: ExprNode, assignment: Sequence[bool]) -> bool:
    """Evaluate the DAG under a 0-indexed assignment list (variable i at i-1)."""
    memo: dict[int, bool] = {}

    def go(n: ExprNode) -> bool:
        key = id(n)
        if key in memo:
            return memo[key]
        if n.kind == VAR:
            value = assignment[n.var_index - 1]
        elif n.kind == CONST:
            value = n.bool_value
        elif n.kind == NOT:
            value = not go(n.children[0])
        elif n.kind == AND:
            value = all(go(c) for c in n.children)
        elif n.kind == OR:
            value = any(go(c) for c in n.children)
        elif n.kind == XOR:
            value = go(n.children[0]) != go(n.children[1])
        elif n.kind == MAJ3:
            value = sum(go(c) for c in n.children) >= 2
        elif n.kind == IMPL:
            value = (not go(n.children[0])) or go(n.children[1])
        elif n.kind == EQUIV:
            value = go(n.children[0]) == go(n.children[1])
        else:
            raise ValueError(f"unknown node kind {n.kind}")
        memo[key] = value
        return value

    return go(node)


def rewrite_aux(node: ExprNode) -> ExprNode:
    """Re-phrase Xor/Majority/Implication/Equivalence using And, Or, Not."""
    memo: dict[int, ExprNode] = {}

    def go(n: ExprNode) -> ExprNode:
        key = id(n)
        if key in memo:
            return memo[key]
        if n.kind in (VAR, CONST):
            out = n
        elif n.kind == NOT:
            out = ExprNode.not_(go(n.children[0]))
        elif n.kind in (AND, OR):
            out = ExprNode(n.kind, tuple(go(c) for c in n.children))
        elif n.kind == XOR:
            a, b = (go(c) for c in n.children)
            out = ExprNode.or_(
                ExprNode.and_(a, ExprNode.not_(b)),
                ExprNode.and_(ExprNode.not_(a), b),
            )
        elif n.kind == MAJ3:
            a, b, c = (go(ch) for ch in n.children)
            out = ExprNode.or_(
                ExprNode.and_(a, b), ExprNode.and_(a, c), ExprNode.and_(b, c)
            )
        elif n.kind == IMPL:
            a, b = (go(c) for c in n.children)
            out = ExprNode.or_(ExprNode.not_(a), b)
        elif n.kind == EQUIV:
            a, b = (go(c) for c in n.children)
            out = ExprNode.or_(
                ExprNode.and_(a, b),
                ExprNode.and_(ExprNode.not_(a), ExprNode.not_(b)),
            )
        else:
            raise ValueError(f"unknown node kind {n.kind}")
        memo[key] = out
        return out

    return go(node)


def to_nnf(node: ExprNode) -> ExprNode:
    """Push negations to the leaves and fold constants; input must be And/Or/Not."""
    memo: dict[tuple[int, bool], ExprNode] = {}

    def go(n: ExprNode, negate: bool) -> ExprNode:
        key = (id(n), negate)
        if key in memo:
            return memo[key]
        if n.kind == CONST:
            out = ExprNode.const(n.bool_value != negate)
        elif n.kind == VAR:
            out = ExprNode.not_(n) if negate else n
        elif n.kind == NOT:
            out = go(n.children[0], not negate)
        elif n.kind in (AND, OR):
            kind = n.kind
            if negate:
                kind = OR if kind == AND else AND
            kids = []
            short = None
            for child in n.children:
                sub = go(child, negate)
                if sub.kind == CONST:
                    if sub.bool_value == (kind == OR):
                        short = sub  # dominating constant
                        break
                    continue  # neutral constant
                kids.append(sub)
            if short is not None:
                out = short
            elif not kids:
                out = ExprNode.const(kind == AND)
            elif len(kids) == 1:
                out = kids[0]
            else:
                out = ExprNode(kind, tuple(kids))
        else:
            raise ValueError(f"to_nnf expects And/Or/Not input, got {n.kind}")
        memo[key] = out
        return out

    return go(node, False)


def lower_to_cnf(formula: ExprNode, view) -> list[list[int]]:
    """Emit an equisatisfiable CNF for ``formula`` into ``view``; returns the clauses.

    Grows the view's variable count to cover the formula if needed. Fresh
    definition variables are functionally determined by the originals.
    """
    needed = formula.max_var()
    if view.var_count < needed:
        view.add_variables(needed - view.var_count)

    emitted: list[list[int]] = []

    def emit(lits: Iterable[int]) -> None:
        lits = list(lits)
        view.add_clause(lits)
        emitted.append(lits)

    def define_and(var: int, lits: list[int]) -> None:
        """var <-> AND(lits), splitting right sides longer than two literals."""
        if len(lits) == 1:
            emit([-var, lits[0]])
            emit([var, -lits[0]])
        elif len(lits) == 2:
            a, b = lits
            emit([-var, a])
            emit([-var, b])
            emit([var, -a, -b])
        else:
            rest = view.add_variable()
            a = lits[0]
            emit([-var, a])
            emit([-var, rest])
            emit([var, -a, -rest])
            define_and(rest, lits[1:])

    def define_or(var: int, lits: list[int]) -> None:
        if len(lits) == 1:
            emit([-var, lits[0]])
            emit([var, -lits[0]])
        elif len(lits) == 2:
            a, b = lits
            emit([var, -a])
            emit([var, -b])
            emit([-var, a, b])
        else:
            rest = view.add_variable()
            a = lits[0]
            emit([var, -a])
            emit([var, -rest])
            emit([-var, a, rest])
            define_or(rest, lits[1:])

    defs: dict[int, int] = {}

    def literalize(n: ExprNode) -> int:
        if n.kind == VAR:
            return n.var_index
        if n.kind == NOT:
            return -n.children[0].var_index
        key = id(n)
        if key in defs:
            return defs[key]
        var = view.add_variable()
        defs[key] = var
        lits = [literalize(c) for c in n.children]
        if n.kind == AND:
            define_and(var, lits)
        else:
            define_or(var, lits)
        return var

    def flatten_or(n: ExprNode, acc: list[int]) -> None:
        for child in n.children:
            if child.kind == OR:
                flatten_or(child, acc)
            else:
                acc.append(literalize(child))

    def assert_true(n: ExprNode) -> None:
        if n.kind == CONST:
            if not n.bool_value:
                fresh = view.add_variable()
                emit([fresh])
                emit([-fresh])
            return
        if n.kind in (VAR, NOT):
            emit([literalize(n)])
            return
        if n.kind == AND:
            for child in n.children:
                assert_true(child)
            return
        lits: list[int] = []
        flatten_or(n, lits)
        emit(lits)

    assert_true(to_nnf(rewrite_aux(formula)))
    return emitted
