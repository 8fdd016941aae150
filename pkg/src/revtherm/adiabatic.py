"""Closed-form dissipation model for adiabatic logic transitions.

A transition of duration t_tr pays switching losses ~ 1/t_tr and leakage
losses ~ t_tr. Device constants are absorbed into adjusted timescales
tau_r' = c_sw * tau_r and tau_e' = tau_e / c_lk; the model is treated as
exact everywhere, with only a warning when t_tr leaves the physically
motivated window (tau_r, tau_e). Units are whatever the caller uses,
consistently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError

REGIME_RATIO = 10.0


@dataclass(frozen=True)
class AdiabaticParams:
    """Signal energy, relaxation/equilibration times, device constants."""

    e_sig: float
    tau_r: float
    tau_e: float
    c_sw: float = 1.0
    c_lk: float = 1.0

    def __post_init__(self):
        for name in ("e_sig", "tau_r", "tau_e", "c_sw", "c_lk"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0.0:
                raise ContractError(f"{name} must be strictly positive, got {v!r}")
            object.__setattr__(self, name, v)
        if self.tau_r_adj >= self.tau_e_adj:
            raise ContractError(
                "adjusted relaxation time must stay below the adjusted "
                f"equilibration time ({self.tau_r_adj!r} >= {self.tau_e_adj!r})"
            )

    @property
    def tau_r_adj(self) -> float:
        return self.c_sw * self.tau_r

    @property
    def tau_e_adj(self) -> float:
        return self.tau_e / self.c_lk


def _check_ttr(p: AdiabaticParams, t_tr: float) -> float:
    t = float(t_tr)
    if not np.isfinite(t) or t <= 0.0:
        raise ContractError(f"transition time must be positive, got {t_tr!r}")
    if not p.tau_r < t < p.tau_e:
        warnings.warn(
            f"transition time {t!r} outside the model window "
            f"({p.tau_r!r}, {p.tau_e!r}); the formulas are extrapolating",
            RuntimeWarning,
            stacklevel=3,
        )
    return t


def switching_loss(p: AdiabaticParams, t_tr: float) -> float:
    """Energy lost to non-adiabatic switching, e_sig * tau_r'/t_tr."""
    return p.e_sig * p.tau_r_adj / _check_ttr(p, t_tr)


def leakage_loss(p: AdiabaticParams, t_tr: float) -> float:
    """Energy lost to equilibration leakage, e_sig * t_tr/tau_e'."""
    return p.e_sig * _check_ttr(p, t_tr) / p.tau_e_adj


def e_diss(p: AdiabaticParams, t_tr: float) -> float:
    """Total dissipation per transition: switching plus leakage."""
    t = _check_ttr(p, t_tr)
    return p.e_sig * p.tau_r_adj / t + p.e_sig * t / p.tau_e_adj


def optimal_ttr(p: AdiabaticParams) -> float:
    """Dissipation-minimizing transition time, the geometric mean of the
    adjusted timescales (where switching and leakage losses balance)."""
    return float(np.sqrt(p.tau_r_adj * p.tau_e_adj))


def min_e_diss(p: AdiabaticParams) -> float:
    """Dissipation at the optimal transition time, 2 e_sig sqrt(tau_r'/tau_e').

    Halving this floor requires quadrupling tau_e'/tau_r': an N-fold
    efficiency gain costs an N^2-fold timescale ratio.
    """
    return 2.0 * p.e_sig * float(np.sqrt(p.tau_r_adj / p.tau_e_adj))


def efficiency_bound(p: AdiabaticParams, c: float) -> float:
    """Upper bound 1 - c*sqrt(tau_r/tau_e) on energy-recovery efficiency.

    Uses the raw (unadjusted) timescales. Meaningful in the slow-
    equilibration regime; a warning flags tau_e / tau_r < 10.
    """
    c = float(c)
    if not np.isfinite(c):
        raise ContractError("efficiency constant must be finite")
    if p.tau_e / p.tau_r < REGIME_RATIO:
        warnings.warn(
            f"timescale ratio {p.tau_e / p.tau_r!r} is too small for the "
            "efficiency bound's asymptotic regime",
            RuntimeWarning,
            stacklevel=2,
        )
    return 1.0 - c * float(np.sqrt(p.tau_r / p.tau_e))


def sweep(p: AdiabaticParams, t_min: float, t_max: float, n_points: int) -> np.ndarray:
    """Log-spaced dissipation table, one row per grid point.

    Columns: t_tr, switching loss, leakage loss, total. The total is the
    bitwise sum of the two loss columns. No validity-window warnings here;
    sweeps are exploratory by design.
    """
    t_min, t_max = float(t_min), float(t_max)
    if not (0.0 < t_min < t_max) or not np.isfinite(t_max):
        raise ContractError(f"need 0 < t_min < t_max, got ({t_min!r}, {t_max!r})")
    n = int(n_points)
    if n < 1:
        raise ContractError("n_points must be at least 1")
    grid = np.geomspace(t_min, t_max, n)
    e_sw = p.e_sig * p.tau_r_adj / grid
    e_lk = p.e_sig * grid / p.tau_e_adj
    return np.column_stack((grid, e_sw, e_lk, e_sw + e_lk))
