"""Reconstruction pipeline: spectral data -> (alpha, beta, gamma, omega, q).

``invert`` runs the twelve reconstruction steps in order and records, per step,
the constants it produced (the provenance log) and the wall time it took. The
log holds no timing information, so two runs on the same input give identical
logs; timings are kept separately.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .admissibility import AdmissibilityReport, check_all
from .domain import AuxSpectra, BoundaryParams, CharFn, Potential, SpectralData, fit_to_dict
from .errors import Inadmissible
from .forward import TOL_ROOT, TOL_SIGN, ForwardResult, forward
from .functions import RecoveredFunctions, recover_functions
from .parameters import RecoveredParams, recover_parameters, with_Q
from .potential import GLSolution, NormingConstants, RefineResult, recover_potential, refine_q


@dataclass
class _Recorder:
    """Collects the provenance log and the per-step timings."""

    log: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    step: str = ""
    _t0: float = 0.0

    def start(self, name: str) -> None:
        self.step = name
        self._t0 = time.perf_counter()

    def done(self, **constants) -> None:
        self.timings[self.step] = time.perf_counter() - self._t0
        self.log.append({"step": self.step, **constants})


@dataclass
class InversionResult:
    boundary: BoundaryParams
    potential: Potential
    params: RecoveredParams
    delta: CharFn
    sigma: CharFn
    functions: RecoveredFunctions
    gl: GLSolution
    norming: NormingConstants
    refine: RefineResult | None
    report: AdmissibilityReport | None
    provenance: list
    timings: dict

    @property
    def aux(self) -> AuxSpectra:
        return self.functions.aux


class PartialInversion(Exception):
    """Wraps a failure inside ``invert`` with the log gathered so far."""

    def __init__(self, cause: Exception, step: str, provenance: list, timings: dict):
        super().__init__(f"step '{step}' failed: {cause}")
        self.cause = cause
        self.step = step
        self.provenance = provenance
        self.timings = timings


def invert(data: SpectralData, N: int | None = None, grid_n: int = 201, tail_window: float = 0.5,
           tol_root: float = TOL_ROOT, refine: bool = False, check: bool = True,
           force: bool = False) -> InversionResult:
    """Recover (alpha, beta, gamma, omega) and q from {mu_k}, {sigma_n}.

    With ``check`` the admissibility report is computed first; unless ``force``
    is set an inadmissible input raises ``Inadmissible`` before any work. Any
    other failure is re-raised as ``PartialInversion`` carrying the log.
    """
    N = len(data.sigma) if N is None else min(int(N), len(data.sigma))
    rec = _Recorder()
    rec.log.append({"step": "config", "K": data.mu.K, "N": N, "grid_n": grid_n,
                    "tail_window": tail_window, "tol_root": tol_root, "refine": refine})
    report = None
    try:
        if check:
            rec.start("admissibility")
            report = check_all(data, tail_window, N)
            rec.done(verdict=report.verdict, failed=report.failed)
            if not report.verdict and not force:
                raise Inadmissible(f"conditions {report.failed} fail", report)

        rec.start("parameters")
        params, delta, sigma, theta = recover_parameters(data.mu, N, tail_window)
        rec.done(fit=fit_to_dict(params.fit), a=params.a, alpha=params.alpha, omega=params.omega,
                 omega_limit=params.omega_limit, beta=params.beta, beta_limit=params.beta_limit,
                 delta_reference=delta.reference, delta_tail_factor=delta.params["tail_factor"],
                 theta=theta)

        rec.start("functions")
        fn = recover_functions(delta, sigma, theta, data.sigma, params.alpha, params.beta,
                               params.omega, tail_window, xtol=tol_root)
        rec.done(v_plus_theta=fn.v_plus_theta, v_minus_theta=fn.v_minus_theta, g_theta=fn.g_theta,
                 clamped=list(fn.clamped), g_band=fn.g.params["band"], lambda_d=fn.aux.lambda_d,
                 gamma=fn.gamma, nu=fn.aux.nu)

        rec.start("potential")
        gl, nc = recover_potential(fn.aux.lambda_d, fn.aux.nu, fn.s_pi, fn.s_prime_pi, grid_n)
        rec.done(norming=nc.alpha_n, shift=gl.shift, tail_kappa=gl.tail_kappa, n_terms=gl.n_terms,
                 max_condition=gl.max_condition, tail_ratio=gl.tail_ratio)
        q = gl.q_rec

        ref = None
        if refine:
            rec.start("refine")
            ref = refine_q(q, fn.aux.lambda_d, fn.aux.nu)
            q = ref.q
            rec.done(residuals=list(ref.residuals), iterations=ref.iterations,
                     no_progress=ref.no_progress, regularization=list(ref.regularization))
    except Inadmissible:
        raise
    except Exception as exc:
        raise PartialInversion(exc, rec.step, rec.log, rec.timings) from exc

    fit = with_Q(params.fit, params.alpha, params.beta, fn.gamma)
    rec.log.append({"step": "summary", "Q_from_asymptotics": fit.Q_est, "Q_from_potential": q.Q})
    bp = BoundaryParams(params.alpha, params.beta, fn.gamma, params.omega)
    return InversionResult(bp, q, params, delta, sigma, fn, gl, nc, ref, report, rec.log, rec.timings)


def q_errors(q_rec: Potential, q_true: Potential) -> dict:
    """Absolute L2, relative L2 (None when q vanishes) and max-norm errors on q_rec's grid."""
    d = Potential(q_rec.values - q_true(q_rec.x))
    ref = Potential(q_true(q_rec.x)).l2_norm()
    return {"l2": d.l2_norm(), "rel_l2": d.l2_norm() / ref if ref > 0 else None,
            "max": float(np.max(np.abs(d.values)))}


@dataclass
class RoundTrip:
    forward: ForwardResult
    inversion: InversionResult
    summary: dict
    timings: dict


def roundtrip(q: Potential, bp: BoundaryParams, K: int = 64, N: int | None = None, grid_n: int = 201,
              tail_window: float = 0.5, tol_root: float = TOL_ROOT, tol_sign: float = TOL_SIGN,
              refine: bool = False) -> RoundTrip:
    """Forward problem, then ``invert`` (the checker result is recorded, not enforced), then errors."""
    t0 = time.perf_counter()
    fr = forward(q, bp, K, N, tol_root=tol_root, tol_sign=tol_sign)
    t_fwd = time.perf_counter() - t0
    inv = invert(fr.data, N, grid_n, tail_window, tol_root, refine, check=True, force=True)
    est = inv.boundary
    summary = {
        "true": {"alpha": bp.alpha, "beta": bp.beta, "gamma": bp.gamma, "omega": bp.omega},
        "recovered": {"alpha": est.alpha, "beta": est.beta, "gamma": est.gamma, "omega": est.omega},
        "parameter_errors": {name: abs(getattr(est, name) - getattr(bp, name))
                             for name in ("alpha", "beta", "gamma", "omega")},
        "q_errors": q_errors(inv.potential, q),
        "q_errors_before_refine": q_errors(inv.gl.q_rec, q) if refine else None,
        "aux_errors": {
            "theta": _max_diff(inv.aux.theta, fr.aux.theta),
            "lambda": _max_diff(inv.aux.lambda_d, fr.aux.lambda_d),
            "nu": _max_diff(inv.aux.nu, fr.aux.nu),
        },
        "admissible": None if inv.report is None else inv.report.verdict,
    }
    return RoundTrip(fr, inv, summary, {"forward": t_fwd, **inv.timings})


def _max_diff(a, b) -> float:
    m = min(len(a), len(b))
    return float(np.max(np.abs(np.asarray(a[:m]) - np.asarray(b[:m])))) if m else math.nan
