"""Delay-robust gain synthesis and adjustment.

A gain is certified for delays up to T_max when (a) the Razumikhin block
condition built from the closed loop (A - BK) x + A_d x(k - T_d) holds with
decay rate alpha and premise factor gamma = 1 + alpha * T_max, and (b) the
exact constant-delay spectral radius of that loop stays below one for every
delay up to T_max.  The block condition is an S-procedure relaxation: the
certificate is the matrix pair (P, s) making

    [[Acl' P Acl - P + a P + s g P,  Acl' P Ad ],
     [Ad' P Acl,                     Ad' P Ad - s P]]

negative definite, with P the closed-loop Lyapunov solution.  Its largest
eigenvalue, minimized over the multiplier s, is the reported margin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

_S_GRID = np.concatenate([[0.0], np.logspace(-6.0, 2.0, 160)])
_SCHUR_TOL = 1e-9


class SynthesisError(RuntimeError):
    """No certifiable gain found within the search budget."""


@dataclass
class GainCertificate:
    gain: np.ndarray
    lyap_matrix: np.ndarray
    decay_rate: float
    gamma: float
    max_delay_steps: int
    max_block_eigenvalue: float   # negative for a valid certificate
    multiplier: float             # s achieving the margin

    def to_dict(self):
        return {
            "gain": self.gain.tolist(),
            "lyap_matrix": self.lyap_matrix.tolist(),
            "decay_rate": self.decay_rate,
            "gamma": self.gamma,
            "max_delay_steps": self.max_delay_steps,
            "max_block_eigenvalue": self.max_block_eigenvalue,
            "multiplier": self.multiplier,
        }


@dataclass
class Infeasible:
    margin: float
    reason: str


@dataclass
class AdjustedGain:
    nominal: np.ndarray
    adjusted: np.ndarray
    distance: float        # squared Frobenius distance to the nominal gain
    trigger_delay: int
    certificate: GainCertificate


def closed_loop(a, b, gain):
    return a - b @ gain


def lyapunov_matrix(a_cl):
    """P solving Acl' P Acl - P = -I, or None if the loop is not Schur."""
    if np.max(np.abs(np.linalg.eigvals(a_cl))) >= 1.0 - _SCHUR_TOL:
        return None
    return sla.solve_discrete_lyapunov(a_cl.T, np.eye(a_cl.shape[0]))


def delay_spectral_radius(gain, a, ad, b, delay):
    """Exact spectral radius of the closed loop at one constant delay."""
    a_cl = closed_loop(a, b, gain)
    n = a.shape[0]
    if delay == 0:
        return float(np.max(np.abs(np.linalg.eigvals(a_cl + ad))))
    m = n * (delay + 1)
    comp = np.zeros((m, m))
    comp[:n, :n] = a_cl
    comp[:n, n * delay:] = ad
    comp[n:, :-n] = np.eye(n * delay)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def block_margin(gain, a, ad, b, decay_rate, max_delay_steps):
    """(margin, s, P) of the Razumikhin block condition; margin=inf if not Schur."""
    a_cl = closed_loop(a, b, gain)
    p = lyapunov_matrix(a_cl)
    if p is None:
        return np.inf, 0.0, None
    gamma = 1.0 + decay_rate * max_delay_steps
    w11 = a_cl.T @ p @ a_cl - p + decay_rate * p
    w12 = a_cl.T @ p @ ad
    w22 = ad.T @ p @ ad
    best, best_s = np.inf, 0.0
    for s in _S_GRID:
        m = np.block([[w11 + s * gamma * p, w12], [w12.T, w22 - s * p]])
        lam = float(np.linalg.eigvalsh(0.5 * (m + m.T))[-1])
        if lam < best:
            best, best_s = lam, float(s)
    return best, best_s, p


def razumikhin_feasible(gain, cfg, max_delay_steps=None, plant=None):
    """Certify a gain for all delays up to the bound, or report the margin.

    ``plant`` may override the config default as a tuple (A, A_d, B); this
    is how randomized-instance tests drive the checker.
    """
    a, ad, b = plant if plant is not None else (cfg.plant_a(), cfg.plant_ad(), cfg.plant_b())
    tmax = cfg.max_delay_steps if max_delay_steps is None else max_delay_steps
    margin, s, p = block_margin(gain, a, ad, b, cfg.decay_rate, tmax)
    if p is None:
        return Infeasible(margin=np.inf, reason="closed loop A - BK is not Schur")
    if not margin < 0.0:
        return Infeasible(margin=margin, reason="block condition not negative definite")
    worst = max(delay_spectral_radius(gain, a, ad, b, t) for t in range(tmax + 1))
    if worst >= 1.0 - _SCHUR_TOL:
        return Infeasible(margin=margin,
                          reason=f"constant-delay spectral radius {worst:.6f} >= 1")
    return GainCertificate(gain=np.array(gain, dtype=float), lyap_matrix=p,
                           decay_rate=cfg.decay_rate,
                           gamma=1.0 + cfg.decay_rate * tmax,
                           max_delay_steps=tmax,
                           max_block_eigenvalue=margin, multiplier=s)


def lqr_gain(a, b, q_weight, r_weight):
    q = q_weight * np.eye(a.shape[0])
    r = r_weight * np.eye(b.shape[1])
    s = sla.solve_discrete_are(a, b, q, r)
    return np.linalg.solve(b.T @ s @ b + r, b.T @ s @ a)


def synthesize_gain(cfg, max_delay_steps=None, plant=None) -> GainCertificate:
    """First certifiable LQR gain on a geometric state-weight ladder.

    Candidates come from LQR(q*I, r*I) with q climbing by the configured
    ladder factor; heavier state weighting gives faster, better-damped
    loops, which is the direction that helps the block condition.
    """
    a, ad, b = plant if plant is not None else (cfg.plant_a(), cfg.plant_ad(), cfg.plant_b())
    tmax = cfg.max_delay_steps if max_delay_steps is None else max_delay_steps
    q = cfg.lqr_q_weight
    last = None
    for _ in range(cfg.synth_ladder_steps):
        try:
            gain = lqr_gain(a, b, q, cfg.lqr_r_weight)
        except np.linalg.LinAlgError:
            q *= cfg.synth_ladder_factor
            continue
        res = razumikhin_feasible(gain, cfg, max_delay_steps=tmax, plant=(a, ad, b))
        if isinstance(res, GainCertificate):
            return res
        last = res
        q *= cfg.synth_ladder_factor
    detail = f" (last margin {last.margin:.4g}: {last.reason})" if last is not None else ""
    raise SynthesisError(
        f"no certifiable gain within {cfg.synth_ladder_steps} ladder steps "
        f"for max delay {tmax}{detail}")


def adjust_gain(nominal: GainCertificate, observed_delay, cfg, plant=None) -> AdjustedGain:
    """Nearest gain (on the segment toward a safe gain) certified at the
    observed delay.

    Bisection finds the smallest blend s of the nominal gain with a gain
    synthesized for the observed delay such that the blend certifies; the
    nominal gain itself is kept when it already certifies (distance 0).
    """
    if observed_delay <= nominal.max_delay_steps:
        raise ValueError("adjust_gain expects observed_delay > certified max delay")
    k_nom = nominal.gain

    res = razumikhin_feasible(k_nom, cfg, max_delay_steps=observed_delay, plant=plant)
    if isinstance(res, GainCertificate):
        return AdjustedGain(nominal=k_nom, adjusted=k_nom, distance=0.0,
                            trigger_delay=observed_delay, certificate=res)

    safe = synthesize_gain(cfg, max_delay_steps=observed_delay, plant=plant)
    k_safe = safe.gain
    lo, hi = 0.0, 1.0
    cert_hi = safe
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        k_mid = (1.0 - mid) * k_nom + mid * k_safe
        res = razumikhin_feasible(k_mid, cfg, max_delay_steps=observed_delay, plant=plant)
        if isinstance(res, GainCertificate):
            hi, cert_hi = mid, res
        else:
            lo = mid
    k_hat = (1.0 - hi) * k_nom + hi * k_safe
    if hi == 1.0:
        k_hat, cert = k_safe, safe
    else:
        cert = cert_hi
    return AdjustedGain(nominal=k_nom, adjusted=k_hat,
                        distance=float(np.sum((k_hat - k_nom) ** 2)),
                        trigger_delay=observed_delay, certificate=cert)


def simulate_delayed_loop(gain, a, ad, b, delay, steps, x0=None, delay_seq=None):
    """Sup norm of the closed-loop state over a horizon (regulation, no input)."""
    n = a.shape[0]
    x0 = np.ones(n) if x0 is None else np.asarray(x0, dtype=float)
    max_d = delay if delay_seq is None else max(max(delay_seq), delay)
    hist = [x0.copy() for _ in range(max_d + 1)]
    a_cl = closed_loop(a, b, gain)
    sup = float(np.linalg.norm(x0))
    for k in range(steps):
        d = delay if delay_seq is None else delay_seq[k]
        xd = hist[-1 - d] if d > 0 else hist[-1]
        x_next = a_cl @ hist[-1] + ad @ xd
        hist = hist[1:] + [x_next]
        sup = max(sup, float(np.linalg.norm(x_next)))
        if not np.isfinite(sup) or sup > 1e12:
            return sup
    return sup
