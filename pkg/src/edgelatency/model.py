"""Shared domain types and the two basic time constants of the system.

Rates are kept as :class:`fractions.Fraction` so the integrality conditions on
queue shapes can be checked exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction


class Scheme(enum.Enum):
    RATELESS_IR = "rateless-ir"
    MDS_IR = "mds-ir"
    MDS_R = "mds-r"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        key = name.strip().lower().replace("_", "-")
        aliases = {"ratelessir": "rateless-ir", "mdsir": "mds-ir", "mdsr": "mds-r", "lt": "rateless-ir"}
        key = aliases.get(key.replace("-", ""), key)
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown scheme {name!r}")


class Decoder(enum.Enum):
    USER = "user"
    EDGE = "edge"


class DesignError(ValueError):
    """Raised for designs that violate storage or integrality constraints."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


@dataclass(frozen=True)
class SystemParams:
    """Physical and system constants.

    ``mu`` is the per-EN storage, normalised by ``k`` (an EN stores at most
    ``mu * k`` coded rows).
    """

    e: int = 5
    u: int = 10
    k: int = 10000
    r: int = 10000
    mu: float = 0.6
    beta: float = 0.03
    nu: float = 1e8
    f_cpu: float = 2.7e9
    n_e: int = 50
    n_u: int = 2
    q: int = 2

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        for name in ("e", "u", "k", "r", "n_e", "n_u"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                out.append(f"{name} must be a positive integer")
        if self.e > self.u:
            out.append("e must not exceed u")
        if not 0 < self.mu <= 1:
            out.append("mu must lie in (0, 1]")
        for name in ("beta", "nu", "f_cpu"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be positive")
        if self.q < 2:
            out.append("q must be at least 2")
        if not out and self.storage_rows * self.e < self.k:
            out.append("storage infeasible: mu*k < k/e")
        return out

    @classmethod
    def check(cls, **kw) -> list[str]:
        """Every violation of the given values, without raising; unset fields take defaults."""
        unknown = sorted(set(kw) - set(cls.__dataclass_fields__))
        if unknown:
            return [f"unknown parameter {name!r}" for name in unknown]
        obj = object.__new__(cls)
        for name, fld in cls.__dataclass_fields__.items():
            object.__setattr__(obj, name, kw.get(name, fld.default))
        try:
            return obj.violations()
        except TypeError as exc:
            return [f"non-numeric parameter: {exc}"]

    @property
    def storage_rows(self) -> int:
        """Largest integer number of coded rows one EN can hold."""
        return math.floor(Fraction(self.mu).limit_denominator(10**9) * self.k)

    @property
    def log2q(self) -> float:
        return math.log2(self.q)

    def replace(self, **kw) -> "SystemParams":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return SystemParams(**d)


@dataclass(frozen=True)
class SchemeDesign:
    """A scheme plus its design triplet.

    For the irregular-repetition schemes the triplet is ``(p, Ro, Ri)``; for
    MDS-R it is ``(xi, Ro, Ri)``. Rates are exact fractions.
    """

    scheme: Scheme
    Ro: Fraction
    Ri: Fraction
    p: int | None = None
    xi: int | None = None
    phi_prime: int = 0
    gamma: int | None = None
    zeta: float | None = None
    Pf: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "Ro", as_fraction(self.Ro))
        object.__setattr__(self, "Ri", as_fraction(self.Ri))
        if not (0 < self.Ro <= 1 and 0 < self.Ri <= 1):
            raise DesignError("rates must lie in (0, 1]")
        if self.scheme is Scheme.MDS_R:
            if self.xi is None:
                raise DesignError("MDS-R needs xi")
        elif self.p is None:
            raise DesignError(f"{self.scheme.value} needs p")

    def n1(self, k: int) -> int:
        """Number of distinct coded rows ``k / Ro``."""
        v = k / self.Ro
        if v.denominator != 1:
            raise DesignError(f"k/Ro = {v} is not an integer")
        return int(v)

    def n(self, k: int) -> int:
        v = k / (self.Ro * self.Ri)
        if v.denominator != 1:
            raise DesignError(f"k/(Ro*Ri) = {v} is not an integer")
        return int(v)

    def rows_per_en(self, k: int, e: int) -> int:
        v = Fraction(k) / (self.Ro * self.Ri * e)
        if v.denominator != 1:
            raise DesignError(f"k/(Ro*Ri*e) = {v} is not an integer")
        return int(v)

    def n_distinct_target(self, k: int) -> int:
        """Distinct products the stopping rule waits for."""
        if self.scheme is Scheme.RATELESS_IR:
            return k + (0 if self.Ro == 1 else self.phi_prime)
        return k

    @property
    def pure_replication(self) -> bool:
        return self.Ro == 1

    def triplet(self) -> tuple:
        first = self.xi if self.scheme is Scheme.MDS_R else self.p
        return (first, self.Ro, self.Ri)

    def validate(self, params: SystemParams) -> None:
        k, e = params.k, params.e
        if k / (self.Ro * self.Ri * e) > Fraction(params.storage_rows):
            raise DesignError("storage constraint k/(Ro*Ri*e) <= mu*k violated")
        n1 = self.n1(k)
        if self.scheme is Scheme.MDS_R:
            c = 1 / self.Ri
            if c.denominator != 1:
                raise DesignError("1/Ri must be an integer for MDS-R")
            c = int(c)
            if c > e:
                raise DesignError("1/Ri cannot exceed e")
            if n1 % math.comb(e, c):
                raise DesignError("C(e, 1/Ri) must divide k/Ro")
            if not 1 <= self.xi <= e:
                raise DesignError("xi must lie in [1, e]")
            return
        if Fraction(k) / (e * self.Ro) != k // (e * self.Ro) or n1 % e:
            raise DesignError("k/(e*Ro) must be an integer")
        self.rows_per_en(k, e)
        target = self.n_distinct_target(k)
        if target > n1:
            raise DesignError("fewer distinct coded rows than the distinct-product target")
        if not target <= self.p <= e * params.storage_rows:
            raise DesignError(f"p={self.p} outside [{target}, {e * params.storage_rows}]")
        if self.p > self.n(k):
            raise DesignError("p exceeds the number of stored rows")


@dataclass(frozen=True)
class LatencyBreakdown:
    comp: float
    dec: float
    comm: float
    psi: float = field(default=float("nan"))
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def total(self) -> float:
        return self.comp + self.dec + self.comm

    @property
    def normalized(self) -> float:
        return self.total / self.psi


def delta(params: SystemParams) -> float:
    """Seconds for one EN to compute one product (u(r-1) adds + ur mults)."""
    u, r = params.u, params.r
    return (u * (r - 1) + u * r) / (params.n_e * params.f_cpu)


def psi(params: SystemParams) -> float:
    """Seconds for a user to compute W x on its own."""
    return params.k * (2 * params.r - 1) / (params.n_u * params.f_cpu)
