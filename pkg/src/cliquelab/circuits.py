"""Monotone circuits over the edge variables of an n-vertex graph.

Gates are binary. A circuit is a topologically ordered gate list; gate ids
are 0-based here and 1-based in the ``MONO v1`` text format. Evaluation is
vectorised: a batch of graphs is packed 64 per machine word and the circuit
is swept level by level over the cone of the output gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np

from .errors import FormatError, ParameterError
from .graphs import Graph, edge_index, edge_pairs

INPUT, AND, OR, CONST = 0, 1, 2, 3
KIND_NAMES = {INPUT: "INPUT", AND: "AND", OR: "OR", CONST: "CONST"}
ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class MonotoneCircuit:
    """Immutable monotone circuit. ``kinds[i]`` is the gate type; for INPUT
    gates ``a[i]`` is the edge slot, for CONST gates ``a[i]`` is the bit."""

    def __init__(self, n_vertices: int, kinds, a, b, output: int):
        self.n_vertices = int(n_vertices)
        self.kinds = np.asarray(kinds, dtype=np.int8)
        self.a = np.asarray(a, dtype=np.int64)
        self.b = np.asarray(b, dtype=np.int64)
        self.output = int(output)
        for arr in (self.kinds, self.a, self.b):
            arr.flags.writeable = False
        g = len(self.kinds)
        if not 0 <= self.output < g:
            raise ParameterError("output gate out of range")
        binary = (self.kinds == AND) | (self.kinds == OR)
        ids = np.arange(g)
        if np.any(binary & ((self.a >= ids) | (self.b >= ids) | (self.a < 0) | (self.b < 0))):
            raise ParameterError("gates may only reference earlier gates")

    def __len__(self):
        return len(self.kinds)

    @property
    def size(self) -> int:
        return int(np.count_nonzero((self.kinds == AND) | (self.kinds == OR)))

    def gate(self, i: int) -> tuple:
        k = int(self.kinds[i])
        if k == INPUT:
            u, v = edge_pairs(self.n_vertices)[self.a[i]]
            return ("INPUT", int(u), int(v))
        if k == CONST:
            return ("CONST", int(self.a[i]))
        return (KIND_NAMES[k], int(self.a[i]), int(self.b[i]))

    @cached_property
    def input_slots(self) -> np.ndarray:
        """Sorted distinct edge slots read by the output cone."""
        live = self._live
        return np.unique(self.a[live & (self.kinds == INPUT)])

    @cached_property
    def _live(self) -> np.ndarray:
        live = np.zeros(len(self), dtype=bool)
        live[self.output] = True
        binary = (self.kinds == AND) | (self.kinds == OR)
        for i in range(self.output, -1, -1):
            if live[i] and binary[i]:
                live[self.a[i]] = True
                live[self.b[i]] = True
        return live

    @cached_property
    def _plan(self):
        """Level schedule of the live cone: (leaf ids, const ids/bits, [(and-ids, a, b), (or-ids, a, b)] per level)."""
        live = np.flatnonzero(self._live)
        level = np.zeros(len(self), dtype=np.int64)
        kinds, a, b = self.kinds, self.a, self.b
        for i in live:
            if kinds[i] == AND or kinds[i] == OR:
                level[i] = 1 + max(level[a[i]], level[b[i]])
        inputs = live[kinds[live] == INPUT]
        slot_pos = np.searchsorted(self.input_slots, a[inputs])
        consts = live[kinds[live] == CONST]
        gates = live[(kinds[live] == AND) | (kinds[live] == OR)]
        levels = []
        if len(gates):
            gl = level[gates]
            order = np.argsort(gl, kind="stable")
            gates, gl = gates[order], gl[order]
            bounds = np.flatnonzero(np.diff(gl)) + 1
            for chunk in np.split(gates, bounds):
                ands = chunk[kinds[chunk] == AND]
                ors = chunk[kinds[chunk] == OR]
                levels.append(((ands, a[ands], b[ands]), (ors, a[ors], b[ors])))
        return inputs, slot_pos, consts, a[consts], levels

    def depth(self) -> int:
        return len(self._plan[4])

    def __eq__(self, other):
        if not isinstance(other, MonotoneCircuit):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and self.output == other.output
            and np.array_equal(self.kinds, other.kinds)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    def __repr__(self):
        return f"MonotoneCircuit(n={self.n_vertices}, gates={len(self)}, size={self.size})"


class CircuitBuilder:
    """Incremental construction; input and constant gates are shared."""

    def __init__(self, n_vertices: int):
        self.n_vertices = int(n_vertices)
        self.kinds: list[int] = []
        self.a: list[int] = []
        self.b: list[int] = []
        self._inputs: dict[int, int] = {}
        self._consts: dict[int, int] = {}

    @classmethod
    def extending(cls, base: MonotoneCircuit) -> "CircuitBuilder":
        bld = cls(base.n_vertices)
        bld.kinds = base.kinds.tolist()
        bld.a = base.a.tolist()
        bld.b = base.b.tolist()
        for i, (k, x) in enumerate(zip(bld.kinds, bld.a)):
            if k == INPUT:
                bld._inputs.setdefault(x, i)
            elif k == CONST:
                bld._consts.setdefault(x, i)
        return bld

    def _push(self, kind, a, b=0) -> int:
        self.kinds.append(kind)
        self.a.append(int(a))
        self.b.append(int(b))
        return len(self.kinds) - 1

    def _check(self, *ids):
        for i in ids:
            if not 0 <= i < len(self.kinds):
                raise ParameterError(f"unknown gate id {i}")

    def input(self, u: int, v: int) -> int:
        return self.input_slot(edge_index(u, v, self.n_vertices))

    def input_slot(self, slot: int) -> int:
        if slot not in self._inputs:
            self._inputs[slot] = self._push(INPUT, slot)
        return self._inputs[slot]

    def const(self, bit: int) -> int:
        bit = int(bool(bit))
        if bit not in self._consts:
            self._consts[bit] = self._push(CONST, bit)
        return self._consts[bit]

    def and_(self, x: int, y: int) -> int:
        self._check(x, y)
        return self._push(AND, x, y)

    def or_(self, x: int, y: int) -> int:
        self._check(x, y)
        return self._push(OR, x, y)

    def _balanced(self, ids, op, empty):
        ids = list(ids)
        if not ids:
            return self.const(empty)
        while len(ids) > 1:
            nxt = [op(ids[i], ids[i + 1]) for i in range(0, len(ids) - 1, 2)]
            if len(ids) % 2:
                nxt.append(ids[-1])
            ids = nxt
        return ids[0]

    def and_all(self, ids) -> int:
        return self._balanced(ids, self.and_, 1)

    def or_all(self, ids) -> int:
        return self._balanced(ids, self.or_, 0)

    def clique_indicator(self, vertices) -> int:
        vs = sorted(set(int(v) for v in vertices))
        if any(not 0 <= v < self.n_vertices for v in vs):
            raise ParameterError("clique vertices outside [n]")
        return self.and_all(self.input(u, v) for i, u in enumerate(vs) for v in vs[i + 1:])

    def build(self, output: int) -> MonotoneCircuit:
        self._check(output)
        return MonotoneCircuit(self.n_vertices, self.kinds, self.a, self.b, output)


def build_clique_indicator(vertices, n: int) -> MonotoneCircuit:
    """Circuit accepting G iff the clique on ``vertices`` is contained in G."""
    bld = CircuitBuilder(n)
    return bld.build(bld.clique_indicator(vertices))


@dataclass(frozen=True)
class ComparatorNetwork:
    """Comparator ``(i, j)``, ``i < j``, leaves the max on wire i and the min on wire j."""

    width: int
    comparators: tuple = field(default=())

    def __len__(self):
        return len(self.comparators)

    def apply(self, values):
        out = list(values)
        if len(out) != self.width:
            raise ParameterError("input width mismatch")
        for i, j in self.comparators:
            if out[i] < out[j]:
                out[i], out[j] = out[j], out[i]
        return out

    def apply_batch(self, bits: np.ndarray) -> np.ndarray:
        x = np.array(bits, dtype=bool, copy=True)
        for i, j in self.comparators:
            hi = x[:, i] | x[:, j]
            x[:, j] &= x[:, i]
            x[:, i] = hi
        return x

    def depth(self) -> int:
        ready = [0] * self.width
        for i, j in self.comparators:
            ready[i] = ready[j] = max(ready[i], ready[j]) + 1
        return max(ready, default=0)


def build_sorting_network(m: int) -> ComparatorNetwork:
    """Batcher's odd-even mergesort on ``m`` wires (any m, not only powers of two)."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    comps = []
    p = 1
    while p < m:
        k = p
        while k >= 1:
            for j in range(k % p, m - k, 2 * k):
                for i in range(min(k, m - j - k)):
                    if (i + j) // (2 * p) == (i + j + k) // (2 * p):
                        comps.append((i + j, i + j + k))
            k //= 2
        p *= 2
    return ComparatorNetwork(m, tuple(comps))


def threshold_wiring(bld: CircuitBuilder, inputs, tau: int) -> int:
    """Append a sorting network over ``inputs`` to ``bld``; return the tau-th output."""
    m = len(inputs)
    if not 1 <= tau <= m:
        raise ParameterError(f"need 1 <= tau <= m, got tau={tau}, m={m}")
    wires = list(inputs)
    for i, j in build_sorting_network(m).comparators:
        hi = bld.or_(wires[i], wires[j])
        lo = bld.and_(wires[i], wires[j])
        wires[i], wires[j] = hi, lo
    return wires[tau - 1]


def build_threshold(m: int, tau: int, inputs, base: MonotoneCircuit) -> MonotoneCircuit:
    """Extend ``base`` with a gate that is 1 iff at least ``tau`` of ``inputs`` are 1."""
    inputs = list(inputs)
    if len(inputs) != m:
        raise ParameterError("expected exactly m input gates")
    bld = CircuitBuilder.extending(base)
    return bld.build(threshold_wiring(bld, inputs, tau))


# ---------------------------------------------------------------- evaluation

def _pack(cols: np.ndarray) -> np.ndarray:
    """(N, k) bool -> (k, ceil(N/64)) uint64, bit t of word w is row 64w+t."""
    n, k = cols.shape
    pad = (-n) % 64
    if pad:
        cols = np.concatenate([cols, np.zeros((pad, k), dtype=bool)])
    packed = np.packbits(cols.T, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(k, -1)


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:n].astype(bool)


def evaluate_inputs(c: MonotoneCircuit, x: np.ndarray) -> np.ndarray:
    """Evaluate on a batch given as ``(N, len(c.input_slots))`` edge values."""
    x = np.asarray(x, dtype=bool)
    if x.ndim != 2 or x.shape[1] != len(c.input_slots):
        raise ParameterError("input matrix must have one column per input slot")
    n = x.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    inputs, slot_pos, consts, bits, levels = c._plan
    # bound the working set to ~64 MB
    rows = max(64, (64 * 1024 * 1024 // (8 * max(1, len(c)))) // 64 * 64)
    out = np.empty(n, dtype=bool)
    vals = None
    for lo in range(0, n, rows):
        block = x[lo:lo + rows]
        words = _pack(block) if block.shape[1] else np.zeros((0, (len(block) + 63) // 64), np.uint64)
        w = words.shape[1]
        if vals is None or vals.shape[1] != w:
            vals = np.zeros((len(c), w), dtype=np.uint64)
        if len(inputs):
            vals[inputs] = words[slot_pos]
        if len(consts):
            vals[consts] = np.where(bits[:, None] == 1, ALL_ONES, np.uint64(0))
        for (ai, aa, ab), (oi, oa, ob) in levels:
            if len(ai):
                vals[ai] = vals[aa] & vals[ab]
            if len(oi):
                vals[oi] = vals[oa] | vals[ob]
        out[lo:lo + len(block)] = _unpack(vals[c.output], len(block))
    return out


def evaluate_batch(c: MonotoneCircuit, edges: np.ndarray) -> np.ndarray:
    """Evaluate on ``(N, C(n,2))`` edge matrices."""
    edges = np.asarray(edges, dtype=bool)
    return evaluate_inputs(c, edges[:, c.input_slots])


def evaluate(c: MonotoneCircuit, g: Graph) -> int:
    if c.n_vertices != g.n:
        raise ParameterError(f"circuit is over {c.n_vertices} vertices, graph has {g.n}")
    return int(evaluate_batch(c, g.edges[None, :])[0])


def gate_values(c: MonotoneCircuit, g: Graph) -> np.ndarray:
    """Value of every gate (live or not) on one graph, by a plain forward pass."""
    vals = np.zeros(len(c), dtype=bool)
    for i in range(len(c)):
        k = c.kinds[i]
        if k == INPUT:
            vals[i] = g.edges[c.a[i]]
        elif k == CONST:
            vals[i] = bool(c.a[i])
        elif k == AND:
            vals[i] = vals[c.a[i]] and vals[c.b[i]]
        else:
            vals[i] = vals[c.a[i]] or vals[c.b[i]]
    return vals


# ------------------------------------------------------------- text format

def serialize_circuit(c: MonotoneCircuit) -> str:
    pairs = edge_pairs(c.n_vertices)
    lines = [f"MONO v1 n={c.n_vertices} gates={len(c)}"]
    for i in range(len(c)):
        k = int(c.kinds[i])
        if k == INPUT:
            u, v = pairs[c.a[i]]
            lines.append(f"{i + 1} INPUT {u + 1} {v + 1}")
        elif k == CONST:
            lines.append(f"{i + 1} CONST {int(c.a[i])}")
        else:
            lines.append(f"{i + 1} {KIND_NAMES[k]} {c.a[i] + 1} {c.b[i] + 1}")
    lines.append(f"OUTPUT {c.output + 1}")
    return "\n".join(lines) + "\n"


def _header_field(token: str, name: str, lineno: int) -> int:
    if not token.startswith(name + "="):
        raise FormatError(f"expected '{name}=<int>' in header", lineno)
    try:
        return int(token[len(name) + 1:])
    except ValueError:
        raise FormatError(f"bad {name} value", lineno) from None


def parse_circuit(text: str) -> MonotoneCircuit:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError("empty input", 1)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "MONO" or head[1] != "v1":
        raise FormatError("expected header 'MONO v1 n=<n> gates=<g>'", 1)
    n = _header_field(head[2], "n", 1)
    g = _header_field(head[3], "gates", 1)
    if len(lines) != g + 2:
        raise FormatError(f"expected {g} gate lines and an OUTPUT line", min(len(lines) + 1, g + 3))
    kinds, a, b = [], [], []
    for gid, line in enumerate(lines[1:g + 1], start=1):
        lineno = gid + 1
        parts = line.split()
        try:
            ints = [int(t) for t in parts[:1] + parts[2:]]
        except ValueError:
            raise FormatError("non-integer field", lineno) from None
        if len(parts) < 3 or ints[0] != gid:
            raise FormatError(f"expected gate id {gid}", lineno)
        kind, args = parts[1], ints[1:]
        if kind == "INPUT" and len(args) == 2:
            u, v = args[0] - 1, args[1] - 1
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise FormatError("bad input edge", lineno)
            kinds.append(INPUT)
            a.append(edge_index(u, v, n))
            b.append(0)
        elif kind == "CONST" and len(args) == 1 and args[0] in (0, 1):
            kinds.append(CONST)
            a.append(args[0])
            b.append(0)
        elif kind in ("AND", "OR") and len(args) == 2:
            for ref in args:
                if not 1 <= ref < gid:
                    raise FormatError(f"reference to gate {ref} before its definition", lineno)
            kinds.append(AND if kind == "AND" else OR)
            a.append(args[0] - 1)
            b.append(args[1] - 1)
        else:
            raise FormatError(f"malformed gate line {line!r}", lineno)
    foot = lines[g + 1].split()
    if len(foot) != 2 or foot[0] != "OUTPUT":
        raise FormatError("expected 'OUTPUT <id>'", g + 2)
    try:
        out = int(foot[1])
    except ValueError:
        raise FormatError("bad output id", g + 2) from None
    if not 1 <= out <= g:
        raise FormatError("output references unknown gate", g + 2)
    return MonotoneCircuit(n, kinds, a, b, out - 1)


def clique_indicator_size(k: int) -> int:
    return max(0, comb(k, 2) - 1)
