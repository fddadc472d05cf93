# scripts/topology/errors.py
"""
Domänfel för topologi-paketet. Alla ärver TopologyError (ValueError) så att
CLI:t kan fånga dem i ett svep och returnera exit-kod 1.
"""
from __future__ import annotations

from typing import Optional


class TopologyError(ValueError):
    pass


class ConstantPoint(TopologyError):
    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"Punkt {self.index} är konstant (nollvektor efter centrering).")


class ZeroVarianceColumn(TopologyError):
    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"Kolumn {self.index} har varians 0 – VNE-metriken är odefinierad.")


class KTooLarge(TopologyError):
    def __init__(self, k: int, n: int):
        self.k, self.n = int(k), int(n)
        super().__init__(f"k={self.k} kräver minst k+1 punkter, molnet har {self.n}.")


class DegenerateCovariance(TopologyError):
    def __init__(self, rank: int, dims: int):
        self.rank, self.dims = int(rank), int(dims)
        super().__init__(f"Kovariansen har rang {self.rank} < {self.dims} – PCA-lins saknas.")


class ZeroRange(TopologyError):
    def __init__(self, axis: int):
        self.axis = int(axis)
        super().__init__(f"Alla linsvärden är lika på axel {self.axis}.")


class EmptyCloud(TopologyError):
    def __init__(self) -> None:
        super().__init__("Punktmolnet är tomt.")


class ComplexTooLarge(TopologyError):
    def __init__(self, edge_count: int, cap: int):
        self.edge_count, self.cap = int(edge_count), int(cap)
        super().__init__(
            f"{self.edge_count} kanter under maxscale överstiger taket {self.cap}. "
            "Sänk maxscale eller kör densitetsfiltrering först."
        )


class ChannelMismatch(TopologyError):
    def __init__(self, channels: int, expected: int = 1):
        self.channels, self.expected = int(channels), int(expected)
        super().__init__(f"Bilden har {self.channels} kanaler, förväntade {self.expected}.")


class ParseError(TopologyError):
    def __init__(self, location: str, reason: str):
        self.location, self.reason = location, reason
        super().__init__(f"Kunde inte tolka {location}: {reason}")


class ShapeError(TopologyError):
    def __init__(self, reason: str, location: Optional[str] = None):
        self.reason, self.location = reason, location
        where = f" ({location})" if location else ""
        super().__init__(f"Inkonsistent form{where}: {reason}")
