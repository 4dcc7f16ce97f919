"""Lattice and periodic-set geometry.

A three-dimensional lattice of covolume V is parametrized by six numbers
(u, v, x, y, z, V) through the basis

    b1 = 2^{1/6} (1/sqrt(u), 0, 0)
    b2 = 2^{1/6} (x/sqrt(u), v/sqrt(u), 0)
    b3 = 2^{1/6} (y/sqrt(u), v z/sqrt(u), u/(v sqrt(2)))

scaled by V^{1/3}; the unscaled triple has unit determinant, so the squared
length of the point (j, k, l) is

    Q(j,k,l) = (2^{1/3} V^{2/3} / u) [(j+xk+yl)^2 + v^2 (k+zl)^2
                                      + (u^3 / (2 v^2)) l^2].

One representative per isometry class lives in Grenier's fundamental domain
(shifted so the unit-density FCC point is interior to the parameter box),
cut out by nine closed inequalities implemented in `in_grenier_domain`.

Periodic sets extend lattices with a finite list of fractional shift
vectors; the hexagonal close packing (two triangular orbits) is the one
named structure here that is not itself a lattice.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

_CBRT2 = 2.0 ** (1.0 / 3.0)
_SQRT3 = math.sqrt(3.0)

GRENIER_CONSTRAINT_NAMES = ("i", "ii", "iii", "iv", "iv'", "v", "vi", "vii", "viii")


@dataclass(frozen=True)
class StructureLabel:
    """Name of a reference structure; SH carries its layer-spacing ratio."""

    kind: str
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("SC", "FCC", "BCC", "SH", "HCP", "OTHER"):
            raise ValueError(f"unknown structure kind {self.kind!r}")
        if self.kind == "SH":
            if self.delta is None or not self.delta > 0:
                raise ValueError("SH label requires delta > 0")
        elif self.delta is not None:
            raise ValueError(f"{self.kind} label carries no delta")

    def __str__(self):
        if self.kind == "SH":
            return f"SH({self.delta:.6g})"
        return self.kind

    def to_dict(self):
        d = {"kind": self.kind}
        if self.delta is not None:
            d["delta"] = self.delta
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d.get("delta"))


SC = StructureLabel("SC")
FCC = StructureLabel("FCC")
BCC = StructureLabel("BCC")
HCP = StructureLabel("HCP")
OTHER = StructureLabel("OTHER")


def SH(delta: float) -> StructureLabel:
    return StructureLabel("SH", float(delta))


@dataclass(frozen=True)
class LatticeParams:
    """Grenier coordinates (u, v, x, y, z) plus the covolume V."""

    u: float
    v: float
    x: float
    y: float
    z: float
    V: float = 1.0

    def __post_init__(self):
        if not (self.u > 0 and self.v > 0):
            raise ValueError("lattice parameters require u > 0 and v > 0")
        if not self.V > 0:
            raise ValueError("covolume V must be positive")

    def with_volume(self, V: float) -> "LatticeParams":
        return LatticeParams(self.u, self.v, self.x, self.y, self.z, V)

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.x, self.y, self.z])

    def to_dict(self):
        return {"u": self.u, "v": self.v, "x": self.x, "y": self.y,
                "z": self.z, "V": self.V}

    @classmethod
    def from_dict(cls, d):
        return cls(d["u"], d["v"], d["x"], d["y"], d["z"], d.get("V", 1.0))


@dataclass(frozen=True)
class Basis:
    """Three basis vectors (rows u1, u2, u3) spanning the lattice."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError("basis needs three 3-vectors")
        object.__setattr__(self, "vectors", arr)
        if abs(np.linalg.det(arr)) < 1e-300:
            raise ValueError("basis is singular")

    @property
    def matrix(self) -> np.ndarray:
        """Column-vector convention: matrix @ n maps index triples to points."""
        return self.vectors.T

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.vectors)))

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def to_dict(self):
        return {"u1": list(self.vectors[0]), "u2": list(self.vectors[1]),
                "u3": list(self.vectors[2])}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array([d["u1"], d["u2"], d["u3"]], dtype=float))


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric positive-definite Gram coefficients of a lattice basis."""

    gram: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.gram, dtype=float)
        object.__setattr__(self, "gram", arr)
        try:
            np.linalg.cholesky(arr)
        except np.linalg.LinAlgError as exc:
            raise ValueError("quadratic form is not positive definite") from exc

    def __call__(self, j, k, l) -> float:
        n = np.array([j, k, l], dtype=float)
        return float(n @ self.gram @ n)


@dataclass(frozen=True)
class PeriodicSet:
    """A lattice basis plus fractional shift vectors (first always zero)."""

    basis: Basis
    shifts: np.ndarray = field(default=None)
    density_normalization: float = None

    def __post_init__(self):
        shifts = self.shifts
        if shifts is None:
            shifts = np.zeros((1, 3))
        shifts = np.asarray(shifts, dtype=float) % 1.0
        if shifts.ndim != 2 or shifts.shape[1] != 3:
            raise ValueError("shifts must be an (n, 3) array")
        if not np.allclose(shifts[0], 0.0):
            raise ValueError("first shift must be the zero vector")
        for i, j in itertools.combinations(range(len(shifts)), 2):
            d = (shifts[i] - shifts[j] + 0.5) % 1.0 - 0.5
            if np.max(np.abs(d)) < 1e-12:
                raise ValueError("shift vectors must be pairwise distinct mod 1")
        object.__setattr__(self, "shifts", shifts)
        dens = len(shifts) / self.basis.volume
        if self.density_normalization is None:
            object.__setattr__(self, "density_normalization", dens)
        elif not math.isclose(self.density_normalization, dens, rel_tol=1e-9):
            raise ValueError("density_normalization inconsistent with basis/shifts")

    @property
    def n_points(self) -> int:
        return len(self.shifts)

    @property
    def point_density(self) -> float:
        return self.n_points / self.basis.volume

    def scale(self, factor: float) -> "PeriodicSet":
        """Dilate every point by `factor` (shifts are fractional, unchanged)."""
        return PeriodicSet(Basis(self.basis.vectors * factor), self.shifts.copy())

    def pair_shift_classes(self):
        """Distinct values of (shift_b - shift_a) mod 1 with their counts.

        The energy per point averages over ordered pairs of orbits, so the
        weights sum to n_points^2.
        """
        classes = {}
        for a in range(self.n_points):
            for b in range(self.n_points):
                d = (self.shifts[b] - self.shifts[a]) % 1.0
                key = tuple(np.round(d, 12) % 1.0)
                classes[key] = classes.get(key, 0) + 1
        return [(np.array(k), w) for k, w in sorted(classes.items())]

    def cache_key(self) -> tuple:
        return (
            tuple(np.round(self.basis.vectors, 12).ravel()),
            tuple(np.round(self.shifts, 12).ravel()),
        )

    def to_dict(self):
        return {
            "basis": self.basis.to_dict(),
            "shifts": [list(s) for s in self.shifts],
            "density_normalization": self.density_normalization,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            Basis.from_dict(d["basis"]),
            np.array(d["shifts"], dtype=float),
            d.get("density_normalization"),
        )


def to_json(obj, **kwargs) -> str:
    """Serialize any of the domain types (or plain data) to JSON."""
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    return json.dumps(obj, **kwargs)


# ---------------------------------------------------------------------------
# parametrization
# ---------------------------------------------------------------------------

def basis_from_params(p: LatticeParams) -> Basis:
    """Basis vectors of the lattice with Grenier coordinates p."""
    s = 2.0 ** (1.0 / 6.0) * p.V ** (1.0 / 3.0)
    ru = math.sqrt(p.u)
    rows = np.array([
        [s / ru, 0.0, 0.0],
        [s * p.x / ru, s * p.v / ru, 0.0],
        [s * p.y / ru, s * p.v * p.z / ru, s * p.u / (p.v * math.sqrt(2.0))],
    ])
    return Basis(rows)


def quadratic_form(p: LatticeParams) -> QuadraticForm:
    """Gram matrix of `basis_from_params(p)` in closed form."""
    c = _CBRT2 * p.V ** (2.0 / 3.0) / p.u
    v2 = p.v * p.v
    g = c * np.array([
        [1.0, p.x, p.y],
        [p.x, p.x * p.x + v2, p.x * p.y + v2 * p.z],
        [p.y, p.x * p.y + v2 * p.z,
         p.y * p.y + v2 * p.z * p.z + p.u ** 3 / (2.0 * v2)],
    ])
    return QuadraticForm(g)


def grenier_constraints(p: LatticeParams) -> dict:
    """Values of the nine closed constraints, each as lhs - rhs >= 0."""
    u, v, x, y, z = p.u, p.v, p.x, p.y, p.z
    w = u ** 3 / (2.0 * v ** 4)
    return {
        "i": (1.0 + x - y) ** 2 + v * v * ((1.0 - z) ** 2 + w) - 1.0,
        "ii": (x - y) ** 2 + v * v * ((1.0 - z) ** 2 + w) - 1.0,
        "iii": x * x + v * v - 1.0,
        "iv": y * y + v * v * (z * z + w) - 1.0,
        "iv'": (y - 1.0) ** 2 + v * v * (z * z + w) - 1.0,
        "v": z * z + w - 1.0,
        "vi": min(x, 0.5 - x),
        "vii": min(y, 1.0 - y),
        "viii": min(z, 0.5 - z),
    }


def in_grenier_domain(p: LatticeParams, tol: float = 1e-9):
    """Membership in the closed fundamental domain.

    Returns (ok, violated) where violated lists the names of constraints
    failing by more than `tol` (the domain is closed, so boundary points
    pass).
    """
    vals = grenier_constraints(p)
    violated = [name for name, val in vals.items() if val < -tol]
    return (not violated), violated


# ---------------------------------------------------------------------------
# named structures
# ---------------------------------------------------------------------------

def _unit_density_basis(label: StructureLabel) -> np.ndarray:
    if label.kind == "SC":
        return np.eye(3)
    if label.kind == "FCC":
        return 2.0 ** (-1.0 / 3.0) * np.array(
            [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
    if label.kind == "BCC":
        return _CBRT2 * np.array(
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.5]])
    if label.kind == "SH":
        a = (2.0 / (_SQRT3 * label.delta)) ** (1.0 / 3.0)
        return a * np.array(
            [[1.0, 0.0, 0.0], [0.5, _SQRT3 / 2.0, 0.0], [0.0, 0.0, label.delta]])
    if label.kind == "HCP":
        # two triangular orbits; a = 2^{1/6} gives one point per unit volume
        a = 2.0 ** (1.0 / 6.0)
        return a * np.array(
            [[1.0, 0.0, 0.0], [0.5, _SQRT3 / 2.0, 0.0],
             [0.0, 0.0, math.sqrt(8.0 / 3.0)]])
    raise ValueError(f"no reference geometry for {label}")


def named_structure(label: StructureLabel, V: float = 1.0) -> PeriodicSet:
    """Reference structure scaled to one point per volume V.

    For HCP the cell holds two points, so its cell volume is 2V; the second
    orbit sits at fractional position (1/3, 1/3, 1/2).
    """
    if not V > 0:
        raise ValueError("V must be positive")
    rows = _unit_density_basis(label)
    shifts = np.zeros((1, 3))
    if label.kind == "HCP":
        shifts = np.array([[0.0, 0.0, 0.0], [1.0 / 3.0, 1.0 / 3.0, 0.5]])
    return PeriodicSet(Basis(rows * V ** (1.0 / 3.0)), shifts)


def grenier_params(label: StructureLabel, V: float = 1.0) -> LatticeParams:
    """Grenier coordinates of a named lattice (HCP is not a lattice).

    SC, FCC and BCC are fixed tuples; SH switches representative at
    delta = 1 where the vertical vector overtakes the in-plane one.
    """
    if label.kind == "SC":
        return LatticeParams(_CBRT2, 1.0, 0.0, 0.0, 0.0, V)
    if label.kind == "FCC":
        return LatticeParams(1.0, _SQRT3 / 2.0, 0.5, 0.5, 1.0 / 3.0, V)
    if label.kind == "BCC":
        return LatticeParams(2.0 ** (5.0 / 3.0) / 3.0, 2.0 * math.sqrt(2.0) / 3.0,
                             1.0 / 3.0, 2.0 / 3.0, 0.5, V)
    if label.kind == "SH":
        delta = label.delta
        if delta >= 1.0:
            u = (1.5 * delta * delta) ** (1.0 / 3.0)
            return LatticeParams(u, _SQRT3 / 2.0, 0.5, 0.0, 0.0, V)
        a2 = (2.0 / (_SQRT3 * delta)) ** (2.0 / 3.0)
        d2 = delta * delta * a2
        return LatticeParams(_CBRT2 / d2, 1.0 / delta, 0.0, 0.0, 0.5, V)
    raise ValueError(f"{label} has no lattice parametrization")


def periodic_set_from_params(p: LatticeParams) -> PeriodicSet:
    return PeriodicSet(basis_from_params(p))


def reduce_to_grenier(basis: Basis, tol: float = 1e-9) -> LatticeParams | None:
    """Search short unimodular basis changes for a Grenier representative.

    Tries every integer change of basis with coefficients in {-1, 0, 1}
    (enough for the reference structures; no general reduction attempted)
    and returns the parameters of the first candidate inside the domain.
    """
    B = basis.matrix
    V = basis.volume
    Bn = B / V ** (1.0 / 3.0)
    hits = []
    for idx, flat in enumerate(itertools.product((-1, 0, 1), repeat=9)):
        U = np.array(flat).reshape(3, 3)
        if round(abs(np.linalg.det(U))) != 1:
            continue
        C = Bn @ U
        p = _params_from_reduced_basis(C, V)
        if p is None:
            continue
        ok, _ = in_grenier_domain(p, tol)
        if ok:
            hits.append((round(p.u, 9), round(p.v, 9), round(p.x, 9),
                         round(p.y, 9), round(p.z, 9), idx, p))
    if not hits:
        return None
    return min(hits)[-1]


def _params_from_reduced_basis(C: np.ndarray, V: float) -> LatticeParams | None:
    # C columns are a unit-determinant basis; invert the QR structure of the
    # parametrization.  Orientation is irrelevant (only the Gram enters).
    G = C.T @ C
    r11sq = G[0, 0]
    x = G[0, 1] / r11sq
    y = G[0, 2] / r11sq
    p22 = G[1, 1] - x * x * r11sq
    if p22 <= 0:
        return None
    z = (G[1, 2] - x * G[0, 2]) / p22
    u = _CBRT2 / r11sq
    v2 = p22 * u / _CBRT2
    if u <= 0 or v2 <= 0:
        return None
    try:
        return LatticeParams(u, math.sqrt(v2), x, y, z, V)
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# shell fingerprints and classification
# ---------------------------------------------------------------------------

def shell_fingerprint(ps: PeriodicSet, n_shells: int = 30,
                      group_tol: float = 1e-8):
    """First squared shell distances and multiplicities at unit density.

    Distances are rescaled so the set has one point per unit volume;
    multiplicities are averaged over the orbits of the reference point.
    `group_tol` is the relative spacing below which neighbouring distances
    merge into one shell.
    """
    rho = ps.point_density
    B = ps.basis.matrix * rho ** (1.0 / 3.0)
    inv_rows = np.linalg.norm(np.linalg.inv(B), axis=1)
    classes = ps.pair_shift_classes()
    n_pts = ps.n_points
    r_max = 2.5
    for _ in range(40):
        d2_all = []
        w_all = []
        for delta, weight in classes:
            delta = (delta + 0.5) % 1.0 - 0.5
            rng = [int(math.floor(r_max * inv_rows[i] + abs(delta[i]) + 1))
                   for i in range(3)]
            grids = np.meshgrid(*[np.arange(-r, r + 1) for r in rng], indexing="ij")
            n = np.stack([g.ravel() for g in grids], axis=1).astype(float) + delta
            pts = n @ B.T
            d2 = np.einsum("ij,ij->i", pts, pts)
            keep = (d2 > 1e-18) & (d2 <= r_max * r_max)
            d2_all.append(d2[keep])
            w_all.append(np.full(keep.sum(), weight, dtype=float))
        d2 = np.concatenate(d2_all)
        w = np.concatenate(w_all) / n_pts
        order = np.argsort(d2)
        d2 = d2[order]
        w = w[order]
        shells = []
        mults = []
        i = 0
        while i < len(d2):
            j = i
            while j + 1 < len(d2) and d2[j + 1] <= d2[i] * (1.0 + group_tol) + 1e-12:
                j += 1
            shells.append(float(np.mean(d2[i:j + 1])))
            mults.append(float(np.sum(w[i:j + 1])))
            i = j + 1
            if len(shells) > n_shells:
                break
        # the last complete shell must lie safely inside the search ball
        if len(shells) > n_shells and shells[n_shells - 1] < 0.9 * r_max * r_max:
            return np.array(shells[:n_shells]), np.array(mults[:n_shells])
        r_max *= 1.35
    raise RuntimeError("shell enumeration failed to converge")


def _fingerprints_match(fp_a, fp_b, tol: float) -> bool:
    da, ma = fp_a
    db, mb = fp_b
    if len(da) != len(db):
        return False
    if np.max(np.abs(da - db) / db) > tol:
        return False
    return np.max(np.abs(ma - mb)) <= 1e-6


def _sh_delta_candidates(first_d2: float):
    # At unit density the triangular spacing a fixes delta through
    # sqrt(3)/2 a^2 d = 1.  The first shell is either a (in-plane) or d
    # (vertical), giving two candidate ratios.
    r1 = math.sqrt(first_d2)
    cands = []
    a = r1
    cands.append(2.0 / (_SQRT3 * a ** 3))
    d = r1
    a2 = 2.0 / (_SQRT3 * d)
    cands.append(d / math.sqrt(a2))
    return sorted(set(round(c, 12) for c in cands if c > 0))


def classify(ps: PeriodicSet, tol: float = 1e-6) -> StructureLabel:
    """Match a periodic set against the named structures by shell shape.

    Compares the first 30 unit-density shells (distances and multiplicities)
    with SC/FCC/BCC/HCP and with the simple-hexagonal family, whose ratio
    delta is reconstructed from the first shell; ties resolve toward the
    smaller delta.  Anything unmatched is OTHER.  Shells are grouped at a
    third of `tol` so that a minimizer known only to tol keeps degenerate
    shells together.
    """
    group_tol = max(tol / 3.0, 1e-9)
    fp = shell_fingerprint(ps, group_tol=group_tol)
    for label in (SC, FCC, BCC, HCP):
        if _fingerprints_match(fp, _named_fingerprint_cached(label, group_tol),
                               tol):
            return label
    for delta in _sh_delta_candidates(fp[0][0]):
        cand = StructureLabel("SH", delta)
        try:
            ref = shell_fingerprint(named_structure(cand, 1.0),
                                    group_tol=group_tol)
        except RuntimeError:
            continue
        if _fingerprints_match(fp, ref, tol):
            return cand
    return OTHER


_FP_CACHE: dict = {}


def _named_fingerprint_cached(label: StructureLabel, group_tol: float = 1e-8):
    key = (label, group_tol)
    if key not in _FP_CACHE:
        _FP_CACHE[key] = shell_fingerprint(named_structure(label, 1.0),
                                           group_tol=group_tol)
    return _FP_CACHE[key]
