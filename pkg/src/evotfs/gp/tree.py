"""Typed expression trees stored in prefix order.

Grammar (three types)::

    Output <- Connect(Array, Array, Array)           root only
    Array  <- Add | Sub | Mul | ProtDiv (Arg, Arg)   at least one Arg is Array
    Array  <- S#i                                    pool window i
    Float  <- c                                      constant in [-1, 1]
    Arg    <- Array | Float

Arithmetic outputs may feed other arithmetic nodes, so the arithmetic
(Smelt) layer nests up to the depth limit.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numba
import numpy as np

from ..errors import LengthMismatch, TreeTypeError

CLAMP = 1e6


class NodeKind(enum.IntEnum):
    SUBSERIES = 0
    CONST = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    CONNECT = 6


class NodeType(enum.Enum):
    ARRAY = "Array"
    FLOAT = "Float"
    OUTPUT = "Output"


ARITHMETIC = (NodeKind.ADD, NodeKind.SUB, NodeKind.MUL, NodeKind.DIV)
ARITY = {
    NodeKind.SUBSERIES: 0,
    NodeKind.CONST: 0,
    NodeKind.ADD: 2,
    NodeKind.SUB: 2,
    NodeKind.MUL: 2,
    NodeKind.DIV: 2,
    NodeKind.CONNECT: 3,
}
NAMES = {
    NodeKind.ADD: "Add",
    NodeKind.SUB: "Sub",
    NodeKind.MUL: "Mul",
    NodeKind.DIV: "ProtDiv",
    NodeKind.CONNECT: "Connect",
}


class Node(NamedTuple):
    kind: NodeKind
    value: float = 0.0  # pool index for SUBSERIES, the constant for CONST

    @property
    def type(self) -> NodeType:
        return node_type(self.kind)

    def __str__(self) -> str:
        if self.kind == NodeKind.SUBSERIES:
            return f"S#{int(self.value)}"
        if self.kind == NodeKind.CONST:
            return repr(float(self.value))
        return NAMES[self.kind]


def node_type(kind: NodeKind) -> NodeType:
    if kind == NodeKind.CONST:
        return NodeType.FLOAT
    if kind == NodeKind.CONNECT:
        return NodeType.OUTPUT
    return NodeType.ARRAY


def subseries(index: int) -> Node:
    return Node(NodeKind.SUBSERIES, int(index))


def const(value: float) -> Node:
    return Node(NodeKind.CONST, float(value))


def op(kind: NodeKind) -> Node:
    return Node(kind, 0.0)


@dataclass(frozen=True, eq=True)
class GpTree:
    nodes: tuple[Node, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, i: int) -> Node:
        return self.nodes[i]

    def __str__(self) -> str:
        return to_prefix(self)

    @property
    def root(self) -> Node:
        return self.nodes[0]

    @cached_property
    def depths(self) -> tuple[int, ...]:
        """Edge distance from the root for every node, in prefix order."""
        out = []
        pending: list[int] = []  # child slots still open at each level
        for node in self.nodes:
            d = len(pending)
            out.append(d)
            if pending:
                pending[-1] -= 1
            arity = ARITY[node.kind]
            if arity:
                pending.append(arity)
            while pending and pending[-1] == 0:
                pending.pop()
        return tuple(out)

    @cached_property
    def depth(self) -> int:
        return max(self.depths)

    def subtree_end(self, i: int) -> int:
        need = 1
        j = i
        while need:
            need += ARITY[self.nodes[j].kind] - 1
            j += 1
        return j

    def subtree(self, i: int) -> tuple[Node, ...]:
        return self.nodes[i : self.subtree_end(i)]

    def subtree_height(self, i: int) -> int:
        end = self.subtree_end(i)
        base = self.depths[i]
        return max(self.depths[i:end]) - base

    def replace(self, i: int, nodes: Sequence[Node]) -> "GpTree":
        return GpTree(self.nodes[:i] + tuple(nodes) + self.nodes[self.subtree_end(i) :])

    def children(self, i: int) -> list[int]:
        out = []
        j = i + 1
        for _ in range(ARITY[self.nodes[i].kind]):
            out.append(j)
            j = self.subtree_end(j)
        return out

    @cached_property
    def program(self) -> tuple[np.ndarray, np.ndarray]:
        codes = np.fromiter((n.kind for n in self.nodes), dtype=np.int64, count=len(self.nodes))
        values = np.fromiter((n.value for n in self.nodes), dtype=np.float64, count=len(self.nodes))
        return codes, values


def validate(tree: GpTree, pool_size: int | None = None, max_depth: int | None = None) -> None:
    """Raise TreeTypeError unless ``tree`` satisfies the typed grammar."""
    nodes = tree.nodes
    if not nodes:
        raise TreeTypeError("empty tree")
    need = 1
    for n in nodes:
        if need == 0:
            raise TreeTypeError("trailing nodes after a complete tree")
        need += ARITY[n.kind] - 1
    if need != 0:
        raise TreeTypeError("truncated tree")
    if nodes[0].kind != NodeKind.CONNECT:
        raise TreeTypeError("root must be Connect")
    for i, n in enumerate(nodes):
        if n.kind == NodeKind.CONNECT:
            if i != 0:
                raise TreeTypeError(f"Connect at position {i}; only allowed at the root")
            kinds = [node_type(nodes[c].kind) for c in tree.children(i)]
            if kinds != [NodeType.ARRAY] * 3:
                raise TreeTypeError("Connect arguments must all be Array")
        elif n.kind in ARITHMETIC:
            kinds = [node_type(nodes[c].kind) for c in tree.children(i)]
            if NodeType.ARRAY not in kinds:
                raise TreeTypeError(f"{NAMES[n.kind]} at {i} has no Array argument")
        elif n.kind == NodeKind.SUBSERIES:
            idx = n.value
            if idx != int(idx) or idx < 0 or (pool_size is not None and idx >= pool_size):
                raise TreeTypeError(f"subseries index {idx} out of range")
        elif n.kind == NodeKind.CONST:
            if not np.isfinite(n.value):
                raise TreeTypeError("non-finite constant")
    if max_depth is not None and tree.depth > max_depth:
        raise TreeTypeError(f"depth {tree.depth} exceeds {max_depth}")


def is_valid(tree: GpTree, pool_size: int | None = None, max_depth: int | None = None) -> bool:
    try:
        validate(tree, pool_size, max_depth)
    except TreeTypeError:
        return False
    return True


@numba.njit(cache=True)
def _run(codes, values, pool, T):
    n = codes.shape[0]
    L = pool.shape[1]
    stack = np.empty((n, L))
    scalar = np.zeros(n)
    is_scalar = np.zeros(n, dtype=np.bool_)
    sp = 0
    clamped = False
    for i in range(n - 1, 0, -1):
        c = codes[i]
        if c == 0:
            stack[sp, :] = pool[int(values[i])]
            is_scalar[sp] = False
            sp += 1
        elif c == 1:
            scalar[sp] = values[i]
            is_scalar[sp] = True
            sp += 1
        else:
            a = sp - 1  # first argument sits on top
            b = sp - 2
            for t in range(L):
                x = scalar[a] if is_scalar[a] else stack[a, t]
                y = scalar[b] if is_scalar[b] else stack[b, t]
                if c == 2:
                    r = x + y
                elif c == 3:
                    r = x - y
                elif c == 4:
                    r = x * y
                else:
                    r = 1.0 if y == 0.0 else x / y
                if r > 1e6:
                    r = 1e6
                    clamped = True
                elif r < -1e6:
                    r = -1e6
                    clamped = True
                elif r != r:
                    r = 1e6
                    clamped = True
                stack[b, t] = r
            is_scalar[b] = False
            sp -= 1
    out = np.empty(T)
    pos = 0
    for k in range(3):
        s = sp - 1 - k
        for t in range(L):
            if pos < T:
                out[pos] = stack[s, t]
                pos += 1
    return out, clamped


def evaluate_tree_flagged(tree: GpTree, pool, T: int) -> tuple[np.ndarray, bool]:
    """Evaluate and report whether any intermediate hit the +/-1e6 clamp."""
    windows = pool.subseries if hasattr(pool, "subseries") else np.asarray(pool, dtype=np.float64)
    if tree.root.kind != NodeKind.CONNECT:
        raise TreeTypeError("root must be Connect")
    if 3 * windows.shape[1] < T:
        raise LengthMismatch(f"Connect yields {3 * windows.shape[1]} values, need {T}")
    codes, values = tree.program
    return _run(codes, values, windows, T)


def evaluate_tree(tree: GpTree, pool, T: int) -> np.ndarray:
    return evaluate_tree_flagged(tree, pool, T)[0]


def to_prefix(tree: GpTree) -> str:
    parts: list[str] = []

    def emit(i: int) -> None:
        node = tree.nodes[i]
        parts.append(str(node))
        kids = tree.children(i)
        if kids:
            parts.append("(")
            for k, c in enumerate(kids):
                if k:
                    parts.append(", ")
                emit(c)
            parts.append(")")

    emit(0)
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:S#(?P<idx>\d+)|(?P<name>[A-Za-z]+)|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<punct>[(),]))")
_BY_NAME = {v: k for k, v in NAMES.items()}


def parse_prefix(text: str) -> GpTree:
    """Inverse of :func:`to_prefix`."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TreeTypeError(f"cannot tokenize at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        tokens.append(m)
    nodes: list[Node] = []
    it = iter(tokens)
    look = [next(it, None)]

    def advance():
        look[0] = next(it, None)

    def expect(ch: str):
        m = look[0]
        if m is None or m.group("punct") != ch:
            raise TreeTypeError(f"expected {ch!r}")
        advance()

    def expr():
        m = look[0]
        if m is None:
            raise TreeTypeError("unexpected end of input")
        if m.group("idx") is not None:
            nodes.append(subseries(int(m.group("idx"))))
            advance()
        elif m.group("num") is not None:
            nodes.append(const(float(m.group("num"))))
            advance()
        elif m.group("name") in _BY_NAME:
            kind = _BY_NAME[m.group("name")]
            nodes.append(op(kind))
            advance()
            expect("(")
            for k in range(ARITY[kind]):
                if k:
                    expect(",")
                expr()
            expect(")")
        else:
            raise TreeTypeError(f"unknown token {m.group(0).strip()!r}")

    expr()
    if look[0] is not None:
        raise TreeTypeError("trailing input")
    return GpTree(tuple(nodes))
