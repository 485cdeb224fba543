"""Union-find nodes with union by rank and path halving.

``find`` may run concurrently with other finds and with one union on the
same tree: every parent update is a single reference store to a valid
ancestor, which CPython performs indivisibly.  Unions on a given tree are
serialized by the caller.
"""
from __future__ import annotations


class UnionFindNode:
    __slots__ = ("parent", "rank", "payload")

    def __init__(self, payload=None):
        self.parent = self
        self.rank = 0
        self.payload = payload

    def find(self) -> UnionFindNode:
        x = self
        while x.parent is not x:
            p = x.parent
            x.parent = p.parent
            x = p
        return x

    def __repr__(self):
        return f"UnionFindNode({self.payload!r})"


def uf_find(n: UnionFindNode) -> UnionFindNode:
    return n.find()


def uf_union(a: UnionFindNode, b: UnionFindNode) -> UnionFindNode:
    """Link two representatives; returns the surviving one."""
    if a is b:
        return a
    if a.rank < b.rank:
        a, b = b, a
    b.parent = a
    if a.rank == b.rank:
        a.rank += 1
    return a
