"""Domain types, index conventions, validation and JSON schemas.

Index conventions
-----------------
* ``TwoSidedSpectrum`` stores eigenvalues mu_k, k = +-0, +-1, ..., +-K.
  ``mu_pos[j]`` is mu_{j+1} and ``mu_neg[j]`` is mu_{-(j+1)}, so ``mu_neg``
  runs away from the origin (decreasing values).
* The central pair (mu_{-0}, mu_{+0}) may be a complex-conjugate pair. In that
  case ``mu_neg0`` carries the negative imaginary part.
* ``SignSequence`` stores sigma_n for n = 1..N only; sigma_{-n} = sigma_n.
* ``AuxSpectra`` stores the positive halves theta_n, lambda_n, nu_n.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from .errors import CountMismatch, DegenerateParameter, UnorderedSpectrum


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _same(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a, b = np.asarray(a), np.asarray(b)
        return a.shape == b.shape and a.dtype.kind == b.dtype.kind and bool(np.array_equal(a, b, equal_nan=a.dtype.kind in "fc"))
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


class _ArrayEq:
    """Field-wise equality that treats numpy arrays as values."""

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(_same(getattr(self, f), getattr(other, f)) for f in self.__dataclass_fields__)

    __hash__ = None


# --------------------------------------------------------------------------- #
# Types
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class Potential(_ArrayEq):
    """Real potential q sampled at ``n_nodes`` uniform nodes on [0, pi].

    Between nodes q is linear; that interpolant is what the ODE engine sees.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 1 or vals.size < 3:
            raise ValueError("a potential needs at least 3 nodes")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential samples must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], n_nodes: int = 201) -> "Potential":
        x = np.linspace(0.0, np.pi, n_nodes)
        return cls(np.broadcast_to(np.asarray(f(x), dtype=float), x.shape))

    @classmethod
    def zero(cls, n_nodes: int = 201) -> "Potential":
        return cls(np.zeros(n_nodes))

    @property
    def n_nodes(self) -> int:
        return int(self.values.size)

    @property
    def h(self) -> float:
        return np.pi / (self.n_nodes - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.n_nodes)

    @property
    def Q(self) -> float:
        """Half the integral of q (exact for the piecewise-linear interpolant)."""
        return 0.5 * float(np.trapezoid(self.values, dx=self.h))

    @property
    def mean(self) -> float:
        return 2.0 * self.Q / np.pi

    def l2_norm(self) -> float:
        return math.sqrt(float(np.trapezoid(self.values**2, dx=self.h)))

    def __call__(self, x):
        return np.interp(x, self.x, self.values)

    def resample(self, n_nodes: int) -> "Potential":
        return Potential(self(np.linspace(0.0, np.pi, n_nodes)))


@dataclass(frozen=True)
class BoundaryParams:
    """(alpha, beta, gamma, omega) of the non-separated boundary conditions."""

    alpha: float
    beta: float
    gamma: float
    omega: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "omega"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.omega)


@dataclass(frozen=True, eq=False)
class TwoSidedSpectrum(_ArrayEq):
    mu_neg0: complex | float
    mu_pos0: complex | float
    mu_pos: np.ndarray
    mu_neg: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu_pos", _frozen(self.mu_pos))
        object.__setattr__(self, "mu_neg", _frozen(self.mu_neg))
        for name in ("mu_neg0", "mu_pos0"):
            v = getattr(self, name)
            v = complex(v) if isinstance(v, complex) or np.iscomplexobj(v) else float(v)
            if isinstance(v, complex) and v.imag == 0.0:
                v = v.real
            object.__setattr__(self, name, v)
        if self.mu_pos.size != self.mu_neg.size:
            raise CountMismatch("mu_pos and mu_neg must hold the same number of entries")

    @property
    def K(self) -> int:
        return int(self.mu_pos.size)

    @property
    def central_is_real(self) -> bool:
        return not (isinstance(self.mu_neg0, complex) or isinstance(self.mu_pos0, complex))

    @property
    def central(self) -> np.ndarray:
        return np.array([self.mu_neg0, self.mu_pos0], dtype=complex)

    def indices(self) -> np.ndarray:
        """Signed indices k != 0 matching :meth:`noncentral`."""
        k = np.arange(1, self.K + 1)
        return np.concatenate([-k[::-1], k])

    def noncentral(self) -> np.ndarray:
        """mu_{-K}, ..., mu_{-1}, mu_1, ..., mu_K."""
        return np.concatenate([self.mu_neg[::-1], self.mu_pos])

    def flattened(self) -> np.ndarray:
        """Real parts in index order mu_{-K} .. mu_{-0}, mu_{+0} .. mu_K."""
        c = self.central.real
        return np.concatenate([self.mu_neg[::-1], c, self.mu_pos])

    def truncate(self, K: int) -> "TwoSidedSpectrum":
        return TwoSidedSpectrum(self.mu_neg0, self.mu_pos0, self.mu_pos[:K], self.mu_neg[:K])

    @classmethod
    def from_flat(cls, values, central=None) -> "TwoSidedSpectrum":
        """Build from the 2K+2 values in index order (or 2K plus a ``central`` pair)."""
        values = np.asarray(values, dtype=float)
        if central is None:
            K = (values.size - 2) // 2
            return cls(values[K], values[K + 1], values[K + 2 :], values[:K][::-1])
        K = values.size // 2
        return cls(central[0], central[1], values[K:], values[:K][::-1])


@dataclass(frozen=True, eq=False)
class SignSequence(_ArrayEq):
    signs: np.ndarray

    def __post_init__(self):
        s = _frozen(self.signs, dtype=np.int64)
        if s.ndim != 1 or not np.all(np.isin(s, (-1, 0, 1))):
            raise ValueError("sign entries must be -1, 0 or +1")
        object.__setattr__(self, "signs", s)

    def __len__(self) -> int:
        return int(self.signs.size)


@dataclass(frozen=True, eq=False)
class SpectralData(_ArrayEq):
    """The complete input of the inverse problem."""

    mu: TwoSidedSpectrum
    sigma: SignSequence


@dataclass(frozen=True, eq=False)
class AuxSpectra(_ArrayEq):
    theta: np.ndarray
    lambda_d: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        for name in ("theta", "lambda_d", "nu"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))


@dataclass(frozen=True, eq=False)
class AsymptoticFit(_ArrayEq):
    """Tail fit mu_k ~ k + a + ((-1)^{k+1} A - B)/(k pi) + tau_k/k."""

    a: float
    A: float
    B: float
    Q_est: float
    residuals: np.ndarray
    window: tuple[int, int] = (0, 0)
    # nuisance coefficients of 1/k^2, (-1)^{k+1}/k^2, 1/k^3, (-1)^{k+1}/k^3
    higher: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "residuals", _frozen(self.residuals))
        object.__setattr__(self, "higher", tuple(float(c) for c in self.higher))


class CharKind(enum.Enum):
    ProductDelta = "product_delta"
    OddPartSigma = "odd_part_sigma"
    RecoveredS = "recovered_s"
    RecoveredSPrime = "recovered_s_prime"
    ClosedForm = "closed_form"


EVEN_KINDS = frozenset({CharKind.OddPartSigma, CharKind.RecoveredS, CharKind.RecoveredSPrime})


@dataclass(frozen=True, eq=False)
class CharFn:
    """An evaluable real function of lambda built during reconstruction.

    ``evaluator`` is vectorised over real lambda; the remaining fields describe
    where the function came from and are kept for diagnostics.
    """

    kind: CharKind
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    zeros: np.ndarray = field(default_factory=lambda: np.empty(0))
    params: Mapping[str, Any] = field(default_factory=dict)
    reference: str | None = None

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        out = np.asarray(self.evaluator(np.atleast_1d(lam_arr)), dtype=float)
        return out.reshape(lam_arr.shape) if lam_arr.ndim else float(out.reshape(-1)[0])

    @property
    def is_even(self) -> bool:
        return self.kind in EVEN_KINDS


# --------------------------------------------------------------------------- #
# Validation
# --------------------------------------------------------------------------- #


def validate_boundary(params: BoundaryParams) -> BoundaryParams:
    if not all(math.isfinite(v) for v in params.as_tuple()):
        raise DegenerateParameter("boundary parameters must be finite")
    if params.alpha == 0.0:
        raise DegenerateParameter("alpha = 0: the boundary condition carries no spectral parameter")
    if params.omega == 0.0:
        raise DegenerateParameter("omega = 0: the boundary conditions separate")
    return params


def validate_spectral_data(data: SpectralData) -> SpectralData:
    """Structural checks only: ordering of mu and count compatibility of sigma."""
    mu = data.mu
    flat = mu.flattened()
    if not np.all(np.isfinite(flat)):
        raise UnorderedSpectrum("spectrum contains non-finite entries")
    bad = np.nonzero(np.diff(flat) <= 0.0)[0]
    if mu.central_is_real and bad.size:
        i = int(bad[0])
        raise UnorderedSpectrum(f"spectrum not strictly increasing at flat positions {i}, {i + 1}")
    if not mu.central_is_real:
        if complex(mu.mu_neg0) != complex(mu.mu_pos0).conjugate():
            raise UnorderedSpectrum("a non-real central pair must be complex conjugate")
        # the pair shares a real part; every other neighbour must still increase
        K = mu.K
        bad = bad[bad != K]
        if bad.size:
            raise UnorderedSpectrum(f"spectrum not increasing at flat position {int(bad[0])}")
    if abs(len(data.sigma) - mu.K) > 1:
        raise CountMismatch(f"{len(data.sigma)} signs for {mu.K} eigenvalues per side")
    return data


# --------------------------------------------------------------------------- #
# JSON serialisation (reals written with 17 significant digits)
# --------------------------------------------------------------------------- #


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "null"
    if not math.isfinite(x):
        raise ValueError("infinite reals are not serialisable")
    return format(x, ".17g")


def dumps(obj, indent: int = 0, _level: int = 0) -> str:
    """JSON text with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1)) if indent else ""
    end = " " * (indent * _level) if indent else ""
    sep = ",\n" if indent else ", "
    nl = "\n" if indent else ""
    if isinstance(obj, complex):
        return dumps({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + nl + sep.join(items) + nl + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _num(obj)


def _real_or_complex(v):
    if isinstance(v, Mapping):
        return complex(v["re"], v["im"])
    return float(v)


def potential_to_dict(q: Potential) -> dict:
    return {"n_nodes": q.n_nodes, "values": q.values}


def potential_from_dict(d: Mapping) -> Potential:
    q = Potential(np.array(d["values"], dtype=float))
    if "n_nodes" in d and int(d["n_nodes"]) != q.n_nodes:
        raise CountMismatch("n_nodes disagrees with the number of samples")
    return q


def boundary_to_dict(bp: BoundaryParams) -> dict:
    return {"alpha": bp.alpha, "beta": bp.beta, "gamma": bp.gamma, "omega": bp.omega}


def boundary_from_dict(d: Mapping) -> BoundaryParams:
    return BoundaryParams(float(d["alpha"]), float(d["beta"]), float(d["gamma"]), float(d["omega"]))


def spectral_to_dict(data: SpectralData) -> dict:
    mu = data.mu
    return {
        "mu_neg0": mu.mu_neg0,
        "mu_pos0": mu.mu_pos0,
        "mu_pos": mu.mu_pos,
        "mu_neg": mu.mu_neg,
        "sigma": data.sigma.signs,
    }


def spectral_from_dict(d: Mapping) -> SpectralData:
    mu = TwoSidedSpectrum(
        _real_or_complex(d["mu_neg0"]),
        _real_or_complex(d["mu_pos0"]),
        np.array(d["mu_pos"], dtype=float),
        np.array(d["mu_neg"], dtype=float),
    )
    return SpectralData(mu, SignSequence(np.array(d["sigma"], dtype=np.int64)))


def aux_to_dict(aux: AuxSpectra) -> dict:
    return {"theta": aux.theta, "lambda": aux.lambda_d, "nu": aux.nu}


def aux_from_dict(d: Mapping) -> AuxSpectra:
    return AuxSpectra(np.array(d["theta"]), np.array(d["lambda"]), np.array(d["nu"]))


def fit_to_dict(fit: AsymptoticFit) -> dict:
    return {"a": fit.a, "A": fit.A, "B": fit.B, "Q_est": fit.Q_est,
            "residuals": fit.residuals, "window": list(fit.window), "higher": list(fit.higher)}


def _opt(v) -> float:
    return float("nan") if v is None else float(v)


def fit_from_dict(d: Mapping) -> AsymptoticFit:
    return AsymptoticFit(float(d["a"]), float(d["A"]), float(d["B"]), _opt(d["Q_est"]),
                         np.array(d["residuals"], dtype=float), tuple(int(w) for w in d["window"]),
                         tuple(float(c) for c in d.get("higher", ())))


def encode(obj) -> str:
    """Serialise any domain type to JSON text."""
    for typ, conv in _ENCODERS.items():
        if isinstance(obj, typ):
            return dumps(conv(obj), indent=1)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def decode(text: str, typ):
    return _DECODERS[typ](json.loads(text))


_ENCODERS = {
    Potential: potential_to_dict,
    BoundaryParams: boundary_to_dict,
    SpectralData: spectral_to_dict,
    AuxSpectra: aux_to_dict,
    AsymptoticFit: fit_to_dict,
    SignSequence: lambda s: {"sigma": s.signs},
    TwoSidedSpectrum: lambda m: {k: v for k, v in spectral_to_dict(SpectralData(m, SignSequence([]))).items()
                                 if k != "sigma"},
}

_DECODERS = {
    Potential: potential_from_dict,
    BoundaryParams: boundary_from_dict,
    SpectralData: spectral_from_dict,
    AuxSpectra: aux_from_dict,
    AsymptoticFit: fit_from_dict,
    SignSequence: lambda d: SignSequence(np.array(d["sigma"], dtype=np.int64)),
    TwoSidedSpectrum: lambda d: spectral_from_dict({**d, "sigma": []}).mu,
}


def write_json(path: str | Path, obj) -> None:
    text = obj if isinstance(obj, str) else (encode(obj) if type(obj) in _ENCODERS else dumps(obj, indent=1))
    Path(path).write_text(text + "\n")


def read_json(path: str | Path, typ):
    return decode(Path(path).read_text(), typ)
