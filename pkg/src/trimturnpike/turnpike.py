"""Trim reference, exponential envelope fitting, and certification.

The trim is the affine cyclic motion generated by a steady point,
anchored at the solution's own midpoint value so the cyclic deviation
vanishes at T/2.  Deviations from the trim are then bounded by a
two-sided exponential envelope C (e^{-mu t} + e^{-mu (T-t)}) whose
constants are fitted from the data and checked pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import pmp
from .errors import DegenerateFit, GridTooCoarse, LambdaMismatch, WindowEmpty
from .steady import SteadyPoint

MEASUREMENT_FLOOR = 1e-13
EXACT_TURNPIKE_TOL = 1e-9
MIN_FIT_SAMPLES = 20


@dataclass(frozen=True)
class TrimReference:
    """Affine cyclic reference anchored at t = T/2."""

    steady: SteadyPoint
    T: float
    anchor_time: float
    anchor_value: np.ndarray
    trim_velocity: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (N+1, p)

    def at(self, t):
        t = np.asarray(t, dtype=float)
        return self.anchor_value + np.multiply.outer(t - self.anchor_time, self.trim_velocity)


@dataclass(frozen=True)
class EnvelopeFit:
    C: float
    mu: float
    window: tuple
    samples_used: int
    floor: float
    refinement_iters: int


@dataclass(frozen=True)
class TurnpikeCertificate:
    lam: np.ndarray
    steady: SteadyPoint
    trim: TrimReference
    mu_star: float
    C_fit: Optional[float]
    mu_fit: Optional[float]
    boundary_layer: Optional[float]
    epsilon_data: float
    times: np.ndarray
    dev_x: np.ndarray
    dev_u: np.ndarray
    dev_y: np.ndarray
    envelope: Optional[np.ndarray]
    max_relative_violation: Optional[float]
    floor: Optional[float]
    exact_turnpike: bool
    degraded: bool  # horizon too short for an envelope fit


def build_trim(sp: SteadyPoint, T, anchor_value, grid=600, problem=None, trim_velocity=None):
    """Affine trim from a steady point, anchored at T/2.

    The generator is g1(xbar) + G2(xbar) ubar; pass either the problem
    (to evaluate it) or the velocity directly.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    anchor_value = np.atleast_1d(np.asarray(anchor_value, dtype=float))
    if trim_velocity is None:
        if problem is None:
            raise ValueError("need problem or trim_velocity to build the trim")
        trim_velocity = problem.eval_g1(sp.xbar) + problem.eval_G2(sp.xbar) @ sp.ubar
    trim_velocity = np.atleast_1d(np.asarray(trim_velocity, dtype=float))
    times = np.linspace(0.0, T, grid + 1) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    values = anchor_value + np.multiply.outer(times - T / 2.0, trim_velocity)
    return TrimReference(
        steady=sp, T=float(T), anchor_time=T / 2.0, anchor_value=anchor_value,
        trim_velocity=trim_velocity, times=times, values=values,
    )


def anchor_from_solution(sol):
    """Midpoint cyclic value y(T/2) of a solution."""
    if len(sol.times) < 3:
        raise GridTooCoarse("need at least 3 samples to anchor at the midpoint")
    return sol.y_at(sol.T / 2.0)


def _two_sided_log_fit(t, d, T, t_window, refine=6):
    """Least-squares fit of log d against the two-sided envelope model.

    Starts from the one-sided line fit on [t_bl, T/2] and iteratively
    absorbs the (small) contribution of the mirrored exponential.
    """
    logd = np.log(d)
    mu = None
    logC = None
    for it in range(refine + 1):
        if it == 0:
            corr = 0.0
        else:
            # log(e^{-mu t} + e^{-mu (T-t)}) = -mu t + log(1 + e^{-mu (T - 2t)})
            corr = np.log1p(np.exp(-mu * (T - 2.0 * t)))
        A = np.vstack([np.ones_like(t), -t]).T
        coef, *_ = np.linalg.lstsq(A, logd - corr, rcond=None)
        logC, mu = coef[0], coef[1]
        if mu <= 0:
            # fall back to the uncorrected line fit
            coef, *_ = np.linalg.lstsq(A, logd, rcond=None)
            logC, mu = coef[0], coef[1]
            break
    return float(np.exp(logC)), float(mu)


def fit_envelope(times, deviation, T, mu_hint, t_bl=None):
    """Fit d(t) <= C (e^{-mu t} + e^{-mu (T-t)}) from sampled deviations.

    The decay rate is estimated by a log-linear fit on the window
    [t_bl, T/2] with t_bl = 3/mu_hint (boundary-layer exclusion); C is
    then the smallest constant covering every sample above the
    measurement floor.  Returns (C, mu, EnvelopeFit diagnostics).
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(deviation, dtype=float)
    if np.any(d < 0):
        raise ValueError("deviations must be nonnegative")
    if mu_hint <= 0:
        raise ValueError("mu_hint must be positive")
    if t_bl is None:
        t_bl = 3.0 / mu_hint
    if np.all(d < MEASUREMENT_FLOOR):
        raise DegenerateFit("all deviations below the measurement floor (exact turnpike)")
    if t_bl >= T / 2.0:
        raise WindowEmpty(f"boundary layer {t_bl:.3g} reaches past T/2 = {T / 2:.3g}")

    window = (t >= t_bl) & (t <= T / 2.0)
    dw, tw = d[window], t[window]
    # noise-floor truncation: samples within one decade of the smallest
    # resolvable deviation carry integrator noise, which would bias the
    # slope of the log fit.  The floor is the median over the tail of
    # the window (deviations are smallest near T/2); pointwise minima
    # are unreliable because sign changes of the numerical error produce
    # spurious near-zero dips
    t_tail = t_bl + 0.9 * (T / 2.0 - t_bl)
    tail = dw[tw >= t_tail]
    floor_w = max(MEASUREMENT_FLOOR,
                  float(np.median(tail)) if len(tail) else MEASUREMENT_FLOOR)
    keep = dw >= 10.0 * floor_w
    if keep.sum() < MIN_FIT_SAMPLES:
        # relax the truncation before giving up on the window
        keep = dw >= MEASUREMENT_FLOOR
        if keep.sum() < MIN_FIT_SAMPLES:
            raise WindowEmpty(
                f"only {int(keep.sum())} usable samples in the fit window (need {MIN_FIT_SAMPLES})"
            )
    C0, mu = _two_sided_log_fit(tw[keep], dw[keep], T, (t_bl, T / 2.0))
    if mu <= 0:
        raise DegenerateFit("fitted decay rate is nonpositive")

    # inflate C to cover every sample above the measurement floor; the
    # floor itself is reported so the bound reads d <= C env + floor
    env = np.exp(-mu * t) + np.exp(-mu * (T - t))
    above = d > max(MEASUREMENT_FLOOR, 10.0 * floor_w)
    if not above.any():
        above = d > MEASUREMENT_FLOOR
    C = float(np.max(d[above] / env[above]))
    C = max(C, np.finfo(float).tiny)
    diag = EnvelopeFit(
        C=C, mu=mu, window=(float(t_bl), float(T / 2.0)),
        samples_used=int(keep.sum()), floor=float(10.0 * floor_w),
        refinement_iters=6,
    )
    return C, mu, diag


def certify(problem, sol, sp: SteadyPoint, report) -> TurnpikeCertificate:
    """Certificate of the exponential trim-turnpike estimates.

    Builds the midpoint-anchored trim, measures the shape/control and
    cyclic deviation channels, fits the envelope on the combined
    shape+control channel, and checks the cyclic channel against the
    same constants.
    """
    if np.max(np.abs(np.atleast_1d(sp.lam) - np.atleast_1d(sol.lam))) > 1e-8:
        raise LambdaMismatch(
            f"steady point lam {sp.lam} differs from solution lam {sol.lam}"
        )
    T = sol.T
    anchor = anchor_from_solution(sol)
    trim = build_trim(sp, T, anchor, grid=sol.times, problem=problem)

    dev_x = np.linalg.norm(sol.x - sp.xbar, axis=1)
    dev_u = np.linalg.norm(sol.u - sp.ubar, axis=1)
    dev_y = np.linalg.norm(sol.y - trim.values, axis=1)
    combined = dev_x + dev_u
    epsilon = float(np.linalg.norm(sp.xbar - problem.x0) + np.linalg.norm(sp.xbar - problem.xT))

    base = dict(
        lam=np.atleast_1d(sol.lam), steady=sp, trim=trim, mu_star=report.mu_star,
        epsilon_data=epsilon, times=sol.times, dev_x=dev_x, dev_u=dev_u, dev_y=dev_y,
    )
    if np.all(combined <= EXACT_TURNPIKE_TOL) and np.all(dev_y <= EXACT_TURNPIKE_TOL):
        return TurnpikeCertificate(
            **base, C_fit=None, mu_fit=None, boundary_layer=None, envelope=None,
            max_relative_violation=None, floor=None, exact_turnpike=True, degraded=False,
        )
    try:
        C, mu, diag = fit_envelope(sol.times, combined, T, report.mu_star)
    except (WindowEmpty, DegenerateFit):
        return TurnpikeCertificate(
            **base, C_fit=None, mu_fit=None, boundary_layer=None, envelope=None,
            max_relative_violation=None, floor=None, exact_turnpike=False, degraded=True,
        )
    env = np.exp(-mu * sol.times) + np.exp(-mu * (T - sol.times))
    # the cyclic channel must obey the same (C, mu) family
    for d in (combined, dev_y):
        above = d > diag.floor
        if above.any():
            C = max(C, float(np.max(d[above] / env[above])))
    bound = C * env + diag.floor
    viol = np.maximum(0.0, (combined - bound) / np.maximum(bound, np.finfo(float).tiny))
    violy = np.maximum(0.0, (dev_y - bound) / np.maximum(bound, np.finfo(float).tiny))
    return TurnpikeCertificate(
        **base, C_fit=C, mu_fit=mu, boundary_layer=diag.window[0],
        envelope=C * env, max_relative_violation=float(max(viol.max(), violy.max())),
        floor=diag.floor, exact_turnpike=False, degraded=False,
    )
