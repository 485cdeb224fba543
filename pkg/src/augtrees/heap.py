"""Fibonacci heap over integer keys.

Only the operations arc growth needs are provided: insert, peek, pop and
meld.  Insert and meld are O(1); pop is O(log n) amortized.  There is no
decrease-key.
"""
from __future__ import annotations

import math


class _Node:
    __slots__ = ("key", "degree", "parent", "child", "left", "right")

    def __init__(self, key):
        self.key = key
        self.degree = 0
        self.parent = None
        self.child = None
        self.left = self
        self.right = self


def _splice(a: _Node, b: _Node) -> None:
    """Concatenate the circular lists containing ``a`` and ``b``."""
    a_right, b_left = a.right, b.left
    a.right = b
    b.left = a
    a_right.left = b_left
    b_left.right = a_right


class FibonacciHeap:
    __slots__ = ("_min", "_size")

    def __init__(self, keys=()):
        self._min = None
        self._size = 0
        for k in keys:
            self.insert(k)

    def __len__(self):
        return self._size

    def __bool__(self):
        return self._size > 0

    def insert(self, key) -> None:
        node = _Node(key)
        m = self._min
        if m is None:
            self._min = node
        else:
            _splice(m, node)
            if key < m.key:
                self._min = node
        self._size += 1

    def peek_min(self):
        m = self._min
        return None if m is None else m.key

    def meld(self, other: FibonacciHeap) -> FibonacciHeap:
        """Move every key of ``other`` into this heap; ``other`` is left empty."""
        om = other._min
        if om is not None:
            if self._min is None:
                self._min = om
            else:
                _splice(self._min, om)
                if om.key < self._min.key:
                    self._min = om
            self._size += other._size
            other._min = None
            other._size = 0
        return self

    def pop_min(self):
        """Remove and return the smallest key, or ``None`` when empty."""
        z = self._min
        if z is None:
            return None
        child = z.child
        if child is not None:
            c = child
            while True:
                c.parent = None
                c = c.right
                if c is child:
                    break
            _splice(z, child)
        # unlink z from the root list
        z.left.right = z.right
        z.right.left = z.left
        self._size -= 1
        if z.right is z:
            self._min = None
        else:
            self._min = z.right
            self._consolidate()
        return z.key

    def _consolidate(self):
        table = [None] * (int(math.log2(self._size + 1) * 1.45) + 2)
        roots = []
        start = w = self._min
        while True:
            roots.append(w)
            w = w.right
            if w is start:
                break
        for x in roots:
            d = x.degree
            while True:
                if d >= len(table):
                    table.extend([None] * (d + 1 - len(table)))
                y = table[d]
                if y is None:
                    break
                if y.key < x.key:
                    x, y = y, x
                # make y a child of x
                y.left.right = y.right
                y.right.left = y.left
                y.left = y.right = y
                y.parent = x
                if x.child is None:
                    x.child = y
                else:
                    _splice(x.child, y)
                x.degree += 1
                table[d] = None
                d += 1
            table[d] = x
        best = None
        for x in table:
            if x is not None and (best is None or x.key < best.key):
                best = x
        self._min = best


def heap_insert(h: FibonacciHeap, rank: int) -> None:
    h.insert(rank)


def heap_pop_min(h: FibonacciHeap):
    return h.pop_min()


def heap_meld(a: FibonacciHeap, b: FibonacciHeap) -> FibonacciHeap:
    return a.meld(b)
