"""Command-line front end: forward, invert, check and roundtrip.

Exit codes: 0 success, 2 input error, 3 inadmissible data, 4 numerical failure.
JSON outputs contain no wall-clock values; timings go to ``timings.json``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .admissibility import check_all
from .domain import (aux_to_dict, boundary_from_dict, boundary_to_dict, dumps, potential_from_dict,
                     potential_to_dict, spectral_from_dict, spectral_to_dict, validate_boundary,
                     validate_spectral_data)
from .errors import (CountMismatch, DegenerateParameter, Inadmissible, InterlacingViolation,
                     NonpositiveNorming, RadicandNegative, SpectralError, UnorderedSpectrum)
from .forward import TOL_SIGN, forward
from .pipeline import PartialInversion, invert, roundtrip

log = logging.getLogger("nonsep_sl")

EXIT_OK, EXIT_INPUT, EXIT_INADMISSIBLE, EXIT_NUMERICAL = 0, 2, 3, 4

_INPUT_ERRORS = (CountMismatch, DegenerateParameter, UnorderedSpectrum)
# raised inside the reconstruction when the data violate a solvability condition
_INADMISSIBLE_ERRORS = (Inadmissible, RadicandNegative, InterlacingViolation, NonpositiveNorming)

FAILED_MARKER = "FAILED"


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path | None
    boundary: Path | None
    output_dir: Path
    k_eigen: int = 64
    n_aux: int = 64
    grid_n: int = 201
    tol_root: float = 1e-10
    tol_sign: float = TOL_SIGN
    tail_window: float = 0.5
    refine: bool = False
    force: bool = False
    emit_csv: bool = False

    def validate(self) -> "RunConfig":
        if self.k_eigen < 16:
            raise InputError("--k-eigen must be at least 16")
        if self.n_aux < 8:
            raise InputError("--n-aux must be at least 8")
        if self.grid_n < 3:
            raise InputError("--grid must be at least 3")
        if not (self.tol_root > 0 and self.tol_sign > 0):
            raise InputError("tolerances must be positive")
        if not 0.0 < self.tail_window <= 1.0:
            raise InputError("--tail-window must lie in (0, 1]")
        return self

    def to_dict(self) -> dict:
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in self.__dict__.items()}


# --------------------------------------------------------------------------- #
# File helpers
# --------------------------------------------------------------------------- #


def _load(path: Path | None, what: str) -> dict:
    if path is None:
        raise InputError(f"{what} file not given")
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"{what} file not found: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {what} file {path}: {exc}") from None


def _parse(conv, d, what: str):
    try:
        return conv(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed {what}: {exc}") from None


def _write(out: Path, name: str, obj) -> None:
    (out / name).write_text(dumps(obj, indent=1) + "\n")


def write_csv(path: Path, header: list[str], columns) -> None:
    """Comma-separated columns with a header row and 17 significant digits."""
    cols = [np.asarray(c, dtype=float) for c in columns]
    np.savetxt(path, np.column_stack(cols), fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def _lam_grid(top: float, step: float = 0.01) -> np.ndarray:
    return np.linspace(0.0, top, int(round(top / step)) + 1)


def _mark_failed(out: Path, step: str, exc: Exception) -> None:
    (out / FAILED_MARKER).write_text(f"step: {step}\nerror: {type(exc).__name__}: {exc}\n")


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #


def _forward_inputs(cfg: RunConfig):
    q = _parse(potential_from_dict, _load(cfg.input, "potential"), "potential")
    bp = _parse(boundary_from_dict, _load(cfg.boundary, "boundary"), "boundary")
    validate_boundary(bp)
    return q, bp


def cmd_forward(cfg: RunConfig) -> int:
    q, bp = _forward_inputs(cfg)
    fr = forward(q, bp, cfg.k_eigen, cfg.n_aux, tol_root=cfg.tol_root, tol_sign=cfg.tol_sign)
    out = cfg.output_dir
    _write(out, "spectral.json", spectral_to_dict(fr.data))
    _write(out, "aux.json", aux_to_dict(fr.aux))
    _write(out, "forward_diagnostics.json", {"config": _deterministic(cfg), **fr.diagnostics})
    if cfg.emit_csv:
        lam = _lam_grid(float(cfg.k_eigen) / 4.0)
        write_csv(out / "delta.csv", ["lambda", "delta"], [lam, fr.delta_at(lam)])
    return EXIT_OK


def _spectral_input(cfg: RunConfig, validate: bool = True):
    data = _parse(spectral_from_dict, _load(cfg.input, "spectral data"), "spectral data")
    return validate_spectral_data(data) if validate else data


def cmd_check(cfg: RunConfig) -> int:
    # no ordering validation: an unordered spectrum is reported through condition 2
    data = _spectral_input(cfg, validate=False)
    if data.mu.K < 16:
        raise InputError("condition 1 needs at least 16 eigenvalues per side")
    report = check_all(data, cfg.tail_window, min(cfg.n_aux, len(data.sigma)))
    (cfg.output_dir / "report.json").write_text(report.to_json() + "\n")
    return EXIT_OK if report.verdict else EXIT_INADMISSIBLE


def _emit_inversion_csv(out: Path, inv) -> None:
    fn = inv.functions
    N = fn.aux.theta.size
    lam = _lam_grid(float(N) / 4.0)
    write_csv(out / "functions.csv", ["lambda", "delta", "sigma", "g", "s_pi", "s_prime_pi"],
              [lam, inv.delta(lam), inv.sigma(lam), fn.g(lam), fn.s_pi(lam), fn.s_prime_pi(lam)])
    write_csv(out / "potential.csv", ["x", "q"], [inv.potential.x, inv.potential.values])
    n = np.arange(1, N + 1)
    write_csv(out / "spectra.csv", ["n", "theta", "lambda", "nu"], [n, fn.aux.theta, fn.aux.lambda_d, fn.aux.nu])


def _inversion_outputs(out: Path, inv, cfg: RunConfig) -> None:
    _write(out, "boundary.json", boundary_to_dict(inv.boundary))
    _write(out, "potential.json", potential_to_dict(inv.potential))
    _write(out, "aux.json", aux_to_dict(inv.aux))
    _write(out, "provenance.json", {"config": _deterministic(cfg), "steps": inv.provenance})
    if inv.report is not None:
        (out / "report.json").write_text(inv.report.to_json() + "\n")
    if cfg.emit_csv:
        _emit_inversion_csv(out, inv)


def _deterministic(cfg: RunConfig) -> dict:
    # input file names only; the output location is not part of the run
    d = cfg.to_dict()
    del d["output_dir"]
    for key in ("input", "boundary"):
        d[key] = None if d[key] is None else Path(d[key]).name
    return d


def _partial(out: Path, cfg: RunConfig, exc: PartialInversion) -> None:
    _write(out, "provenance.json", {"config": _deterministic(cfg), "steps": exc.provenance})
    _write(out, "timings.json", exc.timings)
    _mark_failed(out, exc.step, exc.cause)


def cmd_invert(cfg: RunConfig) -> int:
    data = _spectral_input(cfg)
    out = cfg.output_dir
    try:
        inv = invert(data, cfg.n_aux, cfg.grid_n, cfg.tail_window, cfg.tol_root, cfg.refine,
                     check=True, force=cfg.force)
    except Inadmissible as exc:
        (out / "report.json").write_text(exc.report.to_json() + "\n")
        _mark_failed(out, "admissibility", exc)
        raise
    except PartialInversion as exc:
        _partial(out, cfg, exc)
        raise exc.cause from None
    _inversion_outputs(out, inv, cfg)
    _write(out, "timings.json", inv.timings)
    return EXIT_OK


def cmd_roundtrip(cfg: RunConfig) -> int:
    q, bp = _forward_inputs(cfg)
    out = cfg.output_dir
    try:
        rt = roundtrip(q, bp, cfg.k_eigen, cfg.n_aux, cfg.grid_n, cfg.tail_window, cfg.tol_root,
                       cfg.tol_sign, cfg.refine)
    except PartialInversion as exc:
        _partial(out, cfg, exc)
        raise exc.cause from None
    _write(out, "spectral.json", spectral_to_dict(rt.forward.data))
    _inversion_outputs(out, rt.inversion, cfg)
    _write(out, "summary.json", rt.summary)
    _write(out, "timings.json", rt.timings)
    return EXIT_OK


COMMANDS = {"forward": cmd_forward, "invert": cmd_invert, "check": cmd_check, "roundtrip": cmd_roundtrip}


# --------------------------------------------------------------------------- #
# Argument parsing
# --------------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonsep-sl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "forward": "potential + boundary -> spectral data and auxiliary spectra",
        "invert": "spectral data -> boundary parameters and potential",
        "check": "admissibility report for spectral data",
        "roundtrip": "forward then invert, with error summary",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--input", type=Path, required=True,
                       help="potential JSON (forward, roundtrip) or spectral JSON (invert, check)")
        if name in ("forward", "roundtrip"):
            s.add_argument("--boundary", type=Path, required=True, help="boundary parameter JSON")
        s.add_argument("--output-dir", type=Path, default=Path("."))
        s.add_argument("--k-eigen", type=int, default=64, help="eigenvalues per side (default 64)")
        s.add_argument("--n-aux", type=int, default=64, help="auxiliary zeros theta, lambda, nu (default 64)")
        s.add_argument("--grid", type=int, default=201, help="potential grid nodes (default 201)")
        s.add_argument("--tol-root", type=float, default=1e-10)
        s.add_argument("--tol-sign", type=float, default=TOL_SIGN)
        s.add_argument("--tail-window", type=float, default=0.5)
        s.add_argument("--refine", action="store_true", help="Gauss-Newton refinement of q")
        s.add_argument("--emit-csv", action="store_true")
        if name == "invert":
            s.add_argument("--force", action="store_true",
                           help="reconstruct even when the admissibility check fails")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command, input=args.input, boundary=getattr(args, "boundary", None),
        output_dir=args.output_dir, k_eigen=args.k_eigen, n_aux=args.n_aux, grid_n=args.grid,
        tol_root=args.tol_root, tol_sign=args.tol_sign, tail_window=args.tail_window,
        refine=args.refine, force=getattr(args, "force", False), emit_csv=args.emit_csv,
    ).validate()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.command](cfg)
    except (InputError, *_INPUT_ERRORS) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _INADMISSIBLE_ERRORS as exc:
        print(f"inadmissible data: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (SpectralError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
