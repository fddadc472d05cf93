# scripts/topology/unionfind.py
from __future__ import annotations

from typing import Dict, List


class UnionFind:
    """Union-find med path compression; räknar komponenter."""

    def __init__(self, size: int):
        self.size = int(size)
        # initialt är alla element egna komponenter
        self.parents = list(range(self.size))
        self.num_components = self.size

    def find(self, elem: int) -> int:
        p = elem
        while p != self.parents[p]:
            p = self.parents[p]
        # komprimera vägen så att alla pekar direkt på roten
        while elem != p:
            nxt = self.parents[elem]
            self.parents[elem] = p
            elem = nxt
        return p

    def union(self, a: int, b: int) -> bool:
        """Slå ihop a och b. Returnerar False om de redan hörde ihop."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # lägsta roten vinner – ger deterministiska representanter
        if rb < ra:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.num_components -= 1
        return True

    def components(self) -> List[List[int]]:
        groups: Dict[int, List[int]] = {}
        for i in range(self.size):
            groups.setdefault(self.find(i), []).append(i)
        return list(groups.values())
