"""Multistart bound-constrained minimization over the Grenier domain.

The local method is Nelder-Mead simplex descent (the zeta engine has no
analytic derivatives), restarted from a scrambled low-discrepancy sample of
the parameter box intersected with the fundamental domain, and always
additionally from the named reference structures so that a reference
minimizer is recovered exactly whenever it wins.  Steps leaving the closed
domain are rejected by assigning a large finite penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sopt
from scipy.stats import qmc

from . import lattice as lat
from .energy import LJExponents, lj_energy_from_zetas, lj_optimal_volume, zeta_value
from .lattice import LatticeParams, StructureLabel, in_grenier_domain
from .zeta import zeta_general

_REJECTED = 1e100

#: bounds for (x, y, z); fixed by the fundamental domain itself
_XYZ_BOUNDS = ((0.0, 0.5), (0.0, 1.0), (0.0, 0.5))


class NonConvergenceError(RuntimeError):
    """Raised when every restart of a minimization fails to converge."""


@dataclass(frozen=True)
class MinimizeConfig:
    starts: int = 64
    max_iters: int = 500
    x_tol: float = 1e-10
    f_tol: float = 1e-12
    seed: int = 0
    box: tuple = ((0.05, 4.0), (0.05, 4.0))  # compact (u, v) sub-domain
    hops: int = 5  # monotone perturbation restarts per chain

    def to_dict(self):
        return {"starts": self.starts, "max_iters": self.max_iters,
                "x_tol": self.x_tol, "f_tol": self.f_tol, "seed": self.seed,
                "box": [list(b) for b in self.box], "hops": self.hops}


@dataclass(frozen=True)
class MinimizerReport:
    params: LatticeParams | None
    energy: float
    label: StructureLabel
    converged: bool
    n_restarts_agreeing: int
    n_starts: int = 0
    notes: tuple = ()

    def to_dict(self):
        return {
            "params": self.params.to_dict() if self.params else None,
            "energy": self.energy,
            "label": self.label.to_dict(),
            "converged": self.converged,
            "n_restarts_agreeing": self.n_restarts_agreeing,
            "n_starts": self.n_starts,
            "notes": list(self.notes),
        }


def named_seed_params(V: float):
    """Parameter tuples of the reference lattices used as extra starts.

    HCP is not a lattice and enters the global search as a fixed candidate
    instead; the SH family is seeded at several spacing ratios.
    """
    seeds = [lat.grenier_params(lat.SC, V),
             lat.grenier_params(lat.FCC, V),
             lat.grenier_params(lat.BCC, V)]
    for delta in (0.8, 1.0, 1.2, math.sqrt(8.0 / 3.0)):
        seeds.append(lat.grenier_params(lat.SH(delta), V))
    return seeds


def _penalized(objective, V: float, box) -> callable:
    (ulo, uhi), (vlo, vhi) = box

    def f(vec):
        u, v, x, y, z = (float(t) for t in vec)
        if not (ulo <= u <= uhi and vlo <= v <= vhi):
            return _REJECTED
        try:
            p = LatticeParams(u, v, x, y, z, V)
        except ValueError:
            return _REJECTED
        ok, _ = in_grenier_domain(p, tol=1e-9)
        if not ok:
            return _REJECTED
        val = objective(p)
        if not math.isfinite(val):
            return _REJECTED
        return val

    return f


def _start_vectors(cfg: MinimizeConfig, V: float):
    (ulo, uhi), (vlo, vhi) = cfg.box
    lo = np.array([ulo, vlo, 0.0, 0.0, 0.0])
    hi = np.array([uhi, vhi, 0.5, 1.0, 0.5])
    sampler = qmc.Sobol(d=5, scramble=True, seed=cfg.seed)
    starts = []
    budget = 0
    while len(starts) < cfg.starts and budget < 64 * max(cfg.starts, 1):
        block = qmc.scale(sampler.random(64), lo, hi)
        budget += 64
        for row in block:
            p = LatticeParams(*row, V)
            if in_grenier_domain(p, tol=0.0)[0]:
                starts.append(np.array(row))
                if len(starts) >= cfg.starts:
                    break
    for p in named_seed_params(V):
        starts.append(p.as_array())
    return starts


def _nm_to_stall(f, x0, cfg: MinimizeConfig, bounds):
    # repeated simplex descent until the value stops moving; a fresh simplex
    # around the previous optimum escapes the shrunken-simplex stall
    x, fun, ok = np.asarray(x0, dtype=float), math.inf, False
    for _ in range(6):
        res = sopt.minimize(f, x, method="Nelder-Mead", bounds=bounds,
                            options={"maxiter": cfg.max_iters,
                                     "xatol": cfg.x_tol,
                                     "fatol": cfg.f_tol, "adaptive": True})
        ok = ok or bool(res.success)
        if res.fun >= fun - 1e-13:
            if res.fun < fun:
                x, fun = res.x, float(res.fun)
            break
        x, fun = res.x, float(res.fun)
    return x, fun, ok


def _chain_minimize(f, x0, cfg: MinimizeConfig, bounds, rng):
    # one restart chain: local descent plus monotone perturbation hops, so a
    # chain caught in a shallow side basin can still reach the dominant one;
    # hop sizes alternate between in-basin polish and basin-crossing moves
    x, fun, ok = _nm_to_stall(f, x0, cfg, bounds)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    span = hi - lo
    for hop in range(cfg.hops):
        scale = (0.12 if hop % 2 == 0 else 0.4) * span
        xp = None
        for _ in range(200):  # most of the box violates the domain cuts
            cand = np.clip(x + rng.normal(size=len(x)) * scale, lo, hi)
            if f(cand) < _REJECTED / 2:
                xp = cand
                break
        if xp is None:
            continue
        xc, fc, okc = _nm_to_stall(f, xp, cfg, bounds)
        if fc < fun - 1e-14:
            x, fun, ok = xc, fc, ok or okc
    return x, fun, ok


def minimize_fixed_volume(objective, V: float,
                          cfg: MinimizeConfig | None = None) -> MinimizerReport:
    """Minimize an energy functional over lattice shape at fixed covolume V.

    `objective` maps LatticeParams (carrying V) to a finite energy.  The
    report holds the best local minimum, how many converged restarts agree
    with it within f_tol, and the shell classification of the minimizer.
    """
    cfg = cfg or MinimizeConfig()
    if not V > 0:
        raise ValueError("V must be positive")
    f = _penalized(objective, V, cfg.box)
    bounds = [cfg.box[0], cfg.box[1], *_XYZ_BOUNDS]
    starts = _start_vectors(cfg, V)
    results = []
    any_ok = False
    for i, x0 in enumerate(starts):
        rng = np.random.default_rng((cfg.seed, i))
        x, fun, ok = _chain_minimize(f, x0, cfg, bounds, rng)
        if fun < _REJECTED / 2:
            results.append((fun, x, ok))
            any_ok = any_ok or ok
    if not results or not any_ok:
        return MinimizerReport(None, math.nan, lat.OTHER, False, 0,
                               n_starts=len(starts),
                               notes=("no restart converged",))
    results.sort(key=lambda r: r[0])
    fun, x, _ = results[0]
    agreeing = sum(1 for r in results
                   if r[2] and abs(r[0] - fun) <= max(cfg.f_tol, 1e-12 * abs(fun)))
    params = LatticeParams(*x, V)
    label = lat.classify(lat.periodic_set_from_params(params), tol=1e-4)
    notes = []
    ties = {str(label)}
    for r in results[1:]:
        if abs(r[0] - fun) <= cfg.f_tol:
            other = lat.classify(
                lat.periodic_set_from_params(LatticeParams(*r[1], V)), tol=1e-4)
            if str(other) not in ties and other.kind != "OTHER":
                ties.add(str(other))
                notes.append(f"tie within f_tol: {other}")
    return MinimizerReport(params, fun, label, True, agreeing,
                           n_starts=len(results), notes=tuple(notes))


def riesz_objective(s: float):
    """Energy functional p -> zeta of the lattice p at its covolume."""

    def obj(p: LatticeParams) -> float:
        return zeta_general(lat.periodic_set_from_params(p), s).value

    return obj


def lj_fixed_volume_objective(e: LJExponents):
    """Energy functional p -> LJ energy of the lattice p at covolume p.V."""

    def obj(p: LatticeParams) -> float:
        unit = lat.periodic_set_from_params(p.with_volume(1.0))
        zn = zeta_general(unit, e.n).value
        zm = zeta_general(unit, e.m).value
        return lj_energy_from_zetas(zn, zm, e, p.V)

    return obj


def minimize_global(e: LJExponents, cfg: MinimizeConfig | None = None,
                    include_hcp: bool = True) -> MinimizerReport:
    """Global LJ minimum over lattice shape and volume jointly.

    Each shape is scored at its own closed-form optimal volume (dimension
    reduction), the winner is polished jointly in all six variables, and
    the fixed HCP competitor (volume its only freedom) is compared in when
    `include_hcp` is set.
    """
    cfg = cfg or MinimizeConfig()
    if not e.m > 3.0:
        raise ValueError("global LJ minimization requires n > m > 3")

    def reduced(p: LatticeParams) -> float:
        unit = lat.periodic_set_from_params(p.with_volume(1.0))
        zn = zeta_general(unit, e.n).value
        zm = zeta_general(unit, e.m).value
        if zn <= 0 or zm <= 0:
            return _REJECTED
        vstar = (zn / zm) ** (3.0 / (e.n - e.m))
        return lj_energy_from_zetas(zn, zm, e, vstar)

    report = minimize_fixed_volume(reduced, 1.0, cfg)
    if not report.converged:
        return report
    unit = lat.periodic_set_from_params(report.params.with_volume(1.0))
    vstar, energy = lj_optimal_volume(unit, e)

    # joint six-variable polish around (shape, V*)
    (ulo, uhi), (vlo, vhi) = cfg.box
    fobj = lj_fixed_volume_objective(e)

    def joint(vec):
        u, v, x, y, z, V = (float(t) for t in vec)
        if V <= 0:
            return _REJECTED
        try:
            p = LatticeParams(u, v, x, y, z, V)
        except ValueError:
            return _REJECTED
        if not in_grenier_domain(p, tol=1e-9)[0]:
            return _REJECTED
        return fobj(p)

    x0 = np.append(report.params.as_array(), vstar)
    bounds6 = [cfg.box[0], cfg.box[1], *_XYZ_BOUNDS, (0.05 * vstar, 20.0 * vstar)]
    res = sopt.minimize(joint, x0, method="Nelder-Mead", bounds=bounds6,
                        options={"maxiter": cfg.max_iters, "xatol": cfg.x_tol,
                                 "fatol": cfg.f_tol, "adaptive": True})
    notes = [f"lattice winner at V*={vstar:.12g}"]
    if res.fun < energy:
        energy = float(res.fun)
        vstar = float(res.x[5])
        params = LatticeParams(*res.x[:5], vstar)
    else:
        params = report.params.with_volume(vstar)
    label = lat.classify(lat.periodic_set_from_params(params.with_volume(1.0)),
                         tol=1e-4)
    best = MinimizerReport(params, energy, label, True,
                           report.n_restarts_agreeing, report.n_starts,
                           tuple(notes))
    if include_hcp:
        v_hcp, e_hcp = lj_optimal_volume(lat.HCP, e)
        if e_hcp < best.energy:
            best = MinimizerReport(
                None, e_hcp, lat.HCP, True, report.n_restarts_agreeing,
                report.n_starts,
                (f"HCP candidate wins at V*={v_hcp:.12g}",
                 f"best lattice: {label} at {energy:.12g}"))
        else:
            best = MinimizerReport(
                best.params, best.energy, best.label, True,
                best.n_restarts_agreeing, best.n_starts,
                best.notes + (f"HCP candidate higher: {e_hcp:.12g} at "
                              f"V*={v_hcp:.12g}",))
    return best


def minimize_sh_delta(e: LJExponents, V: float,
                      bracket: tuple[float, float] = (0.3, 5.0)
                      ) -> tuple[float, float]:
    """Best layer-spacing ratio of the simple hexagonal family at volume V.

    One-dimensional bounded minimization of delta -> LJ energy; if the
    minimum pins to a bracket edge the bracket is widened once before
    giving up.
    """
    if not V > 0:
        raise ValueError("V must be positive")

    def f(delta: float) -> float:
        zn = zeta_value(lat.SH(float(delta)), e.n)
        zm = zeta_value(lat.SH(float(delta)), e.m)
        return lj_energy_from_zetas(zn, zm, e, V)

    lo, hi = bracket
    for _ in range(2):
        res = sopt.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-11})
        delta = float(res.x)
        span = hi - lo
        if delta - lo > 1e-3 * span and hi - delta > 1e-3 * span:
            return delta, float(res.fun)
        lo, hi = lo / 2.0, hi * 2.0
    raise NonConvergenceError(
        f"SH delta minimum pinned to the bracket edge near delta={delta}")


def finite_difference_gradient(objective, p: LatticeParams,
                               h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient in the five shape coordinates."""
    x = p.as_array()
    grad = np.empty(5)
    for i in range(5):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = objective(LatticeParams(*xp, p.V))
        fm = objective(LatticeParams(*xm, p.V))
        grad[i] = (fp - fm) / (2.0 * h)
    return grad
