"""Riesz and Lennard-Jones energies of lattices and periodic sets.

The Riesz energy per point is the Epstein zeta value itself.  The
Lennard-Jones model uses the coefficient convention a = m/(n-m),
b = n/(n-m), under which the energy of a unit-density structure scaled to
covolume V separates into two cached zeta components:

    E_{n,m}(V) = (m/(n-m)) zeta(n) / V^{n/3} - (n/(n-m)) zeta(m) / V^{m/3}.

Volume sweeps therefore cost two zeta evaluations per structure, and the
free-volume minimum is available in closed form,
V* = (zeta(n)/zeta(m))^{3/(n-m)}.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .lattice import PeriodicSet, StructureLabel
from .zeta import zeta_general, zeta_of


@dataclass(frozen=True)
class LJExponents:
    """Lennard-Jones exponent pair, n > m.

    mode "summable" enforces m > 3 so both components converge as plain
    sums; mode "continued" admits 0 < m < 3 (m != 3) through the analytic
    continuation.
    """

    n: float
    m: float
    mode: str = "summable"

    def __post_init__(self):
        if not self.n > self.m:
            raise ValueError("LJ exponents require n > m")
        if self.mode == "summable":
            if not self.m > 3.0:
                raise ValueError("summable mode requires n > m > 3")
        elif self.mode == "continued":
            if not self.m > 0.0 or self.m == 3.0 or self.n == 3.0:
                raise ValueError("continued mode requires m > 0 and n, m != 3")
        else:
            raise ValueError(f"unknown exponent mode {self.mode!r}")

    @property
    def a(self) -> float:
        return self.m / (self.n - self.m)

    @property
    def b(self) -> float:
        return self.n / (self.n - self.m)

    def to_dict(self):
        return {"n": self.n, "m": self.m, "mode": self.mode}


@dataclass(frozen=True)
class EnergyValue:
    """LJ energy together with its two zeta components at unit density."""

    value: float
    zeta_n: float
    zeta_m: float

    def to_dict(self):
        return {"value": self.value,
                "components": {"zeta_n": self.zeta_n, "zeta_m": self.zeta_m}}


_cache_lock = threading.Lock()
_component_cache: dict = {}


def zeta_value(structure, s: float) -> float:
    """Cached zeta of a PeriodicSet (Ewald) or StructureLabel (closed form)."""
    if isinstance(structure, StructureLabel):
        return zeta_of(structure, s).value
    key = (structure.cache_key(), float(s))
    with _cache_lock:
        hit = _component_cache.get(key)
    if hit is not None:
        return hit
    val = zeta_general(structure, s).value
    with _cache_lock:
        _component_cache[key] = val
    return val


def riesz_energy(structure, s: float, V: float = 1.0) -> float:
    """Riesz energy per point: the zeta value, scaled by V^{-s/3}.

    `structure` is a PeriodicSet (evaluated as given) or a StructureLabel
    (closed form at unit density); V rescales by homogeneity.
    """
    val = zeta_value(structure, s)
    if V != 1.0:
        val *= V ** (-s / 3.0)
    return val


def lj_energy_from_zetas(zeta_n: float, zeta_m: float, e: LJExponents,
                         V: float) -> float:
    """LJ energy at covolume V from unit-density zeta components."""
    if not V > 0:
        raise ValueError("V must be positive")
    return e.a * zeta_n / V ** (e.n / 3.0) - e.b * zeta_m / V ** (e.m / 3.0)


def lj_energy(structure, e: LJExponents, V: float = 1.0) -> EnergyValue:
    """LJ energy of a unit-density structure dilated to covolume V."""
    zn = zeta_value(structure, e.n)
    zm = zeta_value(structure, e.m)
    return EnergyValue(lj_energy_from_zetas(zn, zm, e, V), zn, zm)


def lj_optimal_volume(structure, e: LJExponents) -> tuple[float, float]:
    """Free-volume minimum of the LJ energy: (V*, E(V*)).

    Stationarity of E(V) gives V* = (zeta(n)/zeta(m))^{3/(n-m)}; both
    components must be positive for an interior minimum to exist.
    """
    zn = zeta_value(structure, e.n)
    zm = zeta_value(structure, e.m)
    if zn <= 0 or zm <= 0:
        raise ValueError(
            "no interior optimal volume: zeta components must be positive "
            f"(got {zn}, {zm})")
    vstar = (zn / zm) ** (3.0 / (e.n - e.m))
    return vstar, lj_energy_from_zetas(zn, zm, e, vstar)


def lj_energy_derivative(zeta_n: float, zeta_m: float, e: LJExponents,
                         V: float) -> float:
    """dE/dV of the two-component LJ energy."""
    return (-(e.n / 3.0) * e.a * zeta_n * V ** (-e.n / 3.0 - 1.0)
            + (e.m / 3.0) * e.b * zeta_m * V ** (-e.m / 3.0 - 1.0))


def clear_component_cache():
    with _cache_lock:
        _component_cache.clear()
