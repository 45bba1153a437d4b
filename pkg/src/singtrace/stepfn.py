"""Log-domain step functions and the spectral models built on them.

A nonincreasing function mu on [0, inf) with finitely many plateaus is
stored as pairs (u_right, w): the natural log of each plateau's right
endpoint and the natural log of its value.  The first plateau starts at
abscissa 0 and the zero tail past the last plateau is implicit.  All
evaluation happens in u = log(t) coordinates so that boundaries up to
u_right around 700 never overflow.

Spectral models expose one evaluation contract: mu_at, distribution,
partial_integral, tail_trace and spectral_sum, realised in closed form
per kind where possible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .curves import LogGrid
from .errors import DomainError, SchemaError
from .logdomain import NEG_INF, log1p_exp

EULER_GAMMA = 0.5772156649015329

# Beyond this u the harmonic model switches to asymptotic formulas: floor(e^u)
# stops being exactly representable near 2^53 and the corrections are < 1e-15.
_HARMONIC_ASYMPTOTIC_U = 36.0


def _match_shape(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


class StepFunction:
    """Nonincreasing piecewise-constant function in log coordinates."""

    def __init__(self, u_rights, ws):
        u_rights = np.asarray(u_rights, dtype=float)
        ws = np.asarray(ws, dtype=float)
        if u_rights.ndim != 1 or u_rights.shape != ws.shape or u_rights.size == 0:
            raise SchemaError("plateaus must be a nonempty list of (u_right, w) pairs")
        for i, (u, w) in enumerate(zip(u_rights, ws)):
            if not (np.isfinite(u) and np.isfinite(w)):
                raise SchemaError(f"plateau {i}: non-finite entry")
        for i in range(1, u_rights.size):
            if not u_rights[i] > u_rights[i - 1]:
                raise SchemaError(f"plateau {i}: u_right must increase strictly")
            if not ws[i] < ws[i - 1]:
                raise SchemaError(f"plateau {i}: value must decrease strictly")
        self.u_rights = u_rights
        self.ws = ws
        self.u_lefts = np.concatenate(([NEG_INF], u_rights[:-1]))
        # log plateau widths: first width is the full interval [0, e^{u_0})
        lw = np.empty_like(u_rights)
        lw[0] = u_rights[0]
        if u_rights.size > 1:
            lw[1:] = u_rights[1:] + np.log1p(-np.exp(u_rights[:-1] - u_rights[1:]))
        self.log_widths = lw
        masses = np.exp(ws + lw)
        self._cum0 = np.concatenate(([0.0], np.cumsum(masses)))

    @property
    def n_plateaus(self) -> int:
        return self.u_rights.size

    def as_pairs(self):
        return [(float(u), float(w)) for u, w in zip(self.u_rights, self.ws)]

    def mu_log_at(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.u_rights, u, side="right")
        out = np.where(idx < self.n_plateaus, self.ws[np.minimum(idx, self.n_plateaus - 1)], NEG_INF)
        return _match_shape(u, out)

    def distribution_log(self, ls):
        ls = np.asarray(ls, dtype=float)
        cnt = np.searchsorted(-self.ws, -ls, side="left")  # number of plateaus with w > ls
        out = np.where(cnt > 0, self.u_rights[np.maximum(cnt, 1) - 1], NEG_INF)
        return _match_shape(ls, out)

    def partial_integral_u(self, u):
        u = np.asarray(u, dtype=float)
        cnt = np.searchsorted(self.u_rights, u, side="right")
        out = self._cum0[cnt].copy()
        active = cnt < self.n_plateaus
        if np.any(active):
            ci = cnt[active] if cnt.ndim else np.array([int(cnt)])
            uu = u[active] if u.ndim else np.array([float(u)])
            left = self.u_lefts[ci]
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                contrib = np.exp(self.ws[ci] + uu + np.log1p(-np.exp(left - uu)))
            contrib = np.where(np.isneginf(uu), 0.0, np.nan_to_num(contrib, nan=0.0, posinf=np.inf))
            if out.ndim:
                out[active] += contrib
            else:
                out = out + contrib[0]
        return _match_shape(u, out)

    def total_integral(self) -> float:
        return float(self._cum0[-1])

    def dilated(self, s: float) -> "StepFunction":
        if not (np.isfinite(s) and s > 0):
            raise DomainError("dilation factor must be a positive finite real")
        return StepFunction(self.u_rights + math.log(s), self.ws)

    def scaled_values(self, s: float) -> "StepFunction":
        if not (np.isfinite(s) and s > 0):
            raise DomainError("value scale must be a positive finite real")
        return StepFunction(self.u_rights, self.ws + math.log(s))


def rearrange(values) -> StepFunction:
    """Decreasing rearrangement of a finite nonnegative list, unit widths.

    Zeros are dropped; equal values merge into one wider plateau.
    """
    vals = list(values)
    if len(vals) == 0:
        raise DomainError("rearrange requires a nonempty list")
    for i, v in enumerate(vals):
        v = float(v)
        if not math.isfinite(v) or v < 0:
            raise DomainError(f"value {i}: must be finite and nonnegative")
    arr = np.sort(np.asarray(vals, dtype=float))[::-1]
    arr = arr[arr > 0.0]
    if arr.size == 0:
        raise DomainError("rearrange requires at least one positive value")
    # merge runs of equal values, tracking right endpoints in unit steps
    u_rights, ws = [], []
    pos = 0
    i = 0
    while i < arr.size:
        j = i
        while j < arr.size and arr[j] == arr[i]:
            j += 1
        pos += j - i
        u_rights.append(math.log(pos))
        ws.append(math.log(arr[i]))
        i = j
    return StepFunction(u_rights, ws)


def dilate(f: StepFunction, s: float) -> StepFunction:
    """Abscissa dilation: the result equals f(t/s)."""
    return f.dilated(s)


class SpectralModel:
    """Positive compact operator represented by its singular-value function."""

    kind = "abstract"
    in_dixmier_ideal = True

    # log-domain evaluation core; array capable -------------------------------
    def mu_log_at(self, u):
        raise NotImplementedError

    def distribution_log(self, ls):
        raise NotImplementedError

    def partial_integral_u(self, u):
        raise NotImplementedError

    def tail_trace_u(self, u):
        u = np.asarray(u, dtype=float)
        ld = np.asarray(self.distribution_log(-u), dtype=float)
        pi = np.asarray(self.partial_integral_u(ld), dtype=float)
        with np.errstate(over="ignore"):
            cut = np.where(np.isneginf(ld), 0.0, np.exp(ld - u))
        out = np.maximum(pi - cut, 0.0)
        return _match_shape(u, out)

    # linear-domain convenience ------------------------------------------------
    def mu_at(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("mu_at requires t >= 0")
        with np.errstate(divide="ignore"):
            u = np.log(t)
        out = np.exp(self.mu_log_at(u))
        return _match_shape(t, out)

    def distribution(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0):
            raise DomainError("distribution requires s > 0")
        with np.errstate(over="ignore"):
            out = np.exp(self.distribution_log(np.log(s)))
        return _match_shape(s, out)

    def partial_integral(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("partial_integral requires t > 0")
        return _match_shape(t, self.partial_integral_u(np.log(t)))

    def tail_trace(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("tail_trace requires t > 0")
        return _match_shape(t, self.tail_trace_u(np.log(t)))

    # structure ----------------------------------------------------------------
    def marcinkiewicz_norm(self, u_max: float = 50.0) -> float:
        raise NotImplementedError

    def boundary_us(self) -> np.ndarray:
        """u-coordinates of plateau boundaries (possibly capped)."""
        return np.array([])

    def feature_points(self, u0: float, u1: float) -> np.ndarray:
        b = self.boundary_us()
        return b[(b >= u0) & (b <= u1)]

    def step_plateaus(self):
        """(u_lefts, u_rights, ws, log_widths) for plateau-based kinds, else None."""
        return None

    def eigenvalue_list(self):
        """Finite eigenvalue array for discrete kinds, else None."""
        return None

    def spectral_sum(self, f, scale: float = 1.0) -> float:
        """tau(f(scale * A)) by direct summation/quadrature. Oracle grade, not fast.

        Requires f >= 0 with enough decay at 0 for convergence.
        """
        raise NotImplementedError

    def to_json_obj(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        return self.kind


class StepModel(SpectralModel):
    """Model backed by an explicit finite-support step function."""

    def __init__(self, step: StepFunction, kind: str = "explicit"):
        self.step = step
        self.kind = kind

    def mu_log_at(self, u):
        return self.step.mu_log_at(u)

    def distribution_log(self, ls):
        return self.step.distribution_log(ls)

    def partial_integral_u(self, u):
        return self.step.partial_integral_u(u)

    def marcinkiewicz_norm(self, u_max: float = 50.0) -> float:
        # On each plateau the ratio F(t)/log(1+t) has no interior maximum:
        # d/dt[mu*(1+t)*log(1+t) - F(t)] = mu*log(1+t) > 0, so the slack
        # function crosses zero at most once and the ratio is maximised at
        # plateau boundaries.  Checking boundaries is therefore exact.
        us = self.step.u_rights
        ratios = self.step.partial_integral_u(us) / log1p_exp(us)
        return float(np.max(ratios))

    def boundary_us(self) -> np.ndarray:
        return self.step.u_rights.copy()

    def step_plateaus(self):
        s = self.step
        return s.u_lefts, s.u_rights, s.ws, s.log_widths

    def eigenvalue_list(self):
        return None

    def spectral_sum(self, f, scale: float = 1.0) -> float:
        terms = []
        lscale = math.log(scale)
        for w, lw in zip(self.step.ws, self.step.log_widths):
            v = math.exp(w + lscale) if w + lscale > -745 else 0.0
            fv = float(f(v))
            if fv > 0.0:
                terms.append(math.exp(lw + math.log(fv)))
        return math.fsum(terms)

    def to_json_obj(self) -> dict:
        return {"kind": "explicit", "plateaus": self.step.as_pairs()}


class FiniteModel(StepModel):
    """Finite positive spectrum with unit-width steps."""

    def __init__(self, values):
        self.values = np.sort(np.asarray(list(values), dtype=float))[::-1]
        self.values = self.values[self.values > 0.0]
        super().__init__(rearrange(self.values), kind="finite")

    def eigenvalue_list(self):
        return self.values.copy()

    def scaled(self, s: float) -> "FiniteModel":
        return FiniteModel(self.values * float(s))

    def to_json_obj(self) -> dict:
        return {"kind": "finite", "values": [float(v) for v in self.values]}


class PowerTailModel(SpectralModel):
    """mu(s) = c (1+s)^(-p). In the Dixmier ideal iff p >= 1; norm c."""

    def __init__(self, c: float, p: float):
        if not (np.isfinite(c) and c > 0 and np.isfinite(p) and p > 0):
            raise SchemaError("power kind requires c > 0 and p > 0")
        self.c = float(c)
        self.p = float(p)
        self.kind = "power"

    @property
    def in_dixmier_ideal(self) -> bool:
        return self.p >= 1.0

    def mu_log_at(self, u):
        u = np.asarray(u, dtype=float)
        out = math.log(self.c) - self.p * log1p_exp(u)
        return _match_shape(u, out)

    def distribution_log(self, ls):
        ls = np.asarray(ls, dtype=float)
        arg = (math.log(self.c) - ls) / self.p
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            mid = np.log(np.expm1(np.clip(arg, None, 700.0)))
        out = np.where(arg <= 0.0, NEG_INF, np.where(arg > 36.0, arg, mid))
        return _match_shape(ls, out)

    def partial_integral_u(self, u):
        u = np.asarray(u, dtype=float)
        l1p = log1p_exp(u)
        if self.p == 1.0:
            out = self.c * l1p
        else:
            out = self.c / (1.0 - self.p) * np.expm1((1.0 - self.p) * l1p)
        return _match_shape(u, out)

    def marcinkiewicz_norm(self, u_max: float = 50.0) -> float:
        # For p = 1 the ratio is identically c; for p > 1 it decreases in t
        # with supremum c approached as t -> 0.
        if self.p >= 1.0:
            return self.c
        return math.inf

    def spectral_sum(self, f, scale: float = 1.0) -> float:
        from .quadrature import adaptive_simpson

        lsc = math.log(scale * self.c)

        def integrand(x):
            # s = e^x - 1; integrand f(scale*c*(1+s)^-p) * e^x
            return f(math.exp(lsc - self.p * x)) * math.exp(x)

        total = 0.0
        x0 = 0.0
        for _ in range(200):
            block = adaptive_simpson(integrand, x0, x0 + 4.0, tol=1e-13)
            total += block
            x0 += 4.0
            if abs(block) < 1e-16 * max(abs(total), 1e-300) and x0 > 8.0:
                return total
        raise DomainError("spectral_sum did not converge for power kind")

    def to_json_obj(self) -> dict:
        return {"kind": "power", "c": self.c, "p": self.p}

    def label(self) -> str:
        return f"power(c={self.c},p={self.p})"


_H_TABLE_MAX = 1 << 20
_h_table = None


def _harmonic_table() -> np.ndarray:
    global _h_table
    if _h_table is None:
        t = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, _H_TABLE_MAX + 1))))
        _h_table = t
    return _h_table


def harmonic_number(m):
    """H_m for integer m >= 0, table-backed below 2^20, asymptotic above."""
    m = np.asarray(m)
    mf = m.astype(float)
    small = m <= _H_TABLE_MAX
    out = np.empty(mf.shape, dtype=float)
    if np.any(small):
        out[small] = _harmonic_table()[m[small].astype(np.int64)]
    if np.any(~small):
        x = mf[~small]
        out[~small] = np.log(x) + EULER_GAMMA + 1.0 / (2 * x) - 1.0 / (12 * x**2) + 1.0 / (120 * x**4)
    return _match_shape(m, out)


class HarmonicModel(SpectralModel):
    """mu_n = 1/n for n >= 1 (unit-width steps)."""

    kind = "harmonic"

    def mu_log_at(self, u):
        u = np.asarray(u, dtype=float)
        big = u >= _HARMONIC_ASYMPTOTIC_U
        safe_u = np.where(big, 0.0, u)
        with np.errstate(over="ignore"):
            n = np.floor(np.exp(safe_u))
        out = np.where(big, -u, -np.log(n + 1.0))
        return _match_shape(u, out)

    def distribution_log(self, ls):
        ls = np.asarray(ls, dtype=float)
        big = ls <= -_HARMONIC_ASYMPTOTIC_U
        safe = np.where(big, 0.0, ls)
        d = np.ceil(np.exp(-safe)) - 1.0
        with np.errstate(divide="ignore"):
            mid = np.where(d > 0, np.log(np.maximum(d, 1e-300)), NEG_INF)
        out = np.where(big, -ls, np.where(ls >= 0.0, NEG_INF, mid))
        return _match_shape(ls, out)

    def partial_integral_u(self, u):
        u = np.asarray(u, dtype=float)
        big = u >= _HARMONIC_ASYMPTOTIC_U
        safe_u = np.where(big, 0.0, u)
        t = np.exp(safe_u)
        m = np.floor(t)
        small_val = harmonic_number(m.astype(np.int64)) + (t - m) / (m + 1.0)
        out = np.where(big, u + EULER_GAMMA, small_val)
        return _match_shape(u, out)

    def tail_trace_u(self, u):
        u = np.asarray(u, dtype=float)
        big = u >= _HARMONIC_ASYMPTOTIC_U
        safe_u = np.where(big, 0.0, u)
        t = np.exp(safe_u)
        m = np.maximum(np.ceil(t) - 1.0, 0.0)
        small_val = np.where(m >= 1, harmonic_number(m.astype(np.int64)) - m / t, 0.0)
        out = np.where(big, u + EULER_GAMMA - 1.0, small_val)
        return _match_shape(u, out)

    def marcinkiewicz_norm(self, u_max: float = 50.0) -> float:
        # Boundary ratios H_n/log(1+n) decrease from n = 1 and tend to 1,
        # so the supremum is attained at the first boundary.
        return 1.0 / math.log(2.0)

    def boundary_us(self) -> np.ndarray:
        return np.log(np.arange(1, 4097, dtype=float))

    def feature_points(self, u0: float, u1: float) -> np.ndarray:
        lo = max(1, int(math.floor(math.exp(min(u0, 30.0)))))
        hi = int(math.ceil(math.exp(min(u1, 30.0)))) if u1 < 30.0 else lo + 4096
        ns = np.arange(lo, min(hi, lo + 4096) + 1, dtype=float)
        b = np.log(ns)
        return b[(b >= u0) & (b <= u1)]

    def spectral_sum(self, f, scale: float = 1.0) -> float:
        total = 0.0
        n0 = 1
        for _ in range(2000):
            ns = np.arange(n0, n0 + 10000, dtype=float)
            block = float(np.sum(f(scale / ns)))
            total += block
            n0 += 10000
            if block < 1e-16 * max(total, 1e-300):
                return total
        raise DomainError("spectral_sum did not converge for harmonic kind")

    def to_json_obj(self) -> dict:
        return {"kind": "harmonic"}


@dataclass
class MajorizationReport:
    """Partial-integral comparison of two models at a checkpoint set."""

    checkpoints: list  # (t, lhs, rhs) with lhs = integral of B, rhs = integral of A
    verdict: bool
    worst_margin: float
    tolerance: float


def _checkpoint_us(a: SpectralModel, b: SpectralModel, grid) -> np.ndarray:
    if isinstance(grid, LogGrid):
        us = grid.points()
    else:
        us = np.asarray(grid, dtype=float)
    parts = [us]
    for m in (a, b):
        bu = m.boundary_us()
        if bu.size:
            parts.append(bu[(bu >= us.min() - 1e-12) & (bu <= us.max() + 1e-12)])
    return np.unique(np.concatenate(parts))


def majorizes(a: SpectralModel, b: SpectralModel, grid) -> MajorizationReport:
    """Check whether b is majorized by a on grid plus plateau boundaries."""
    if not (a.in_dixmier_ideal and b.in_dixmier_ideal):
        raise DomainError("majorization check requires both models in the Dixmier ideal")
    us = _checkpoint_us(a, b, grid)
    rhs = np.asarray(a.partial_integral_u(us), dtype=float)
    lhs = np.asarray(b.partial_integral_u(us), dtype=float)
    margins = rhs - lhs
    tol = 1e-10 * max(1.0, float(np.max(np.abs(rhs))))
    with np.errstate(over="ignore"):
        ts = np.exp(us)
    checkpoints = list(zip(ts.tolist(), lhs.tolist(), rhs.tolist()))
    worst = float(np.min(margins))
    return MajorizationReport(checkpoints=checkpoints, verdict=bool(worst >= -tol), worst_margin=worst, tolerance=tol)


def tail_trace(model: SpectralModel, t: float) -> float:
    """Mass of mu above the level 1/t: integral of (mu - 1/t) over {mu > 1/t}."""
    return model.tail_trace(t)


def tail_equivalence_check(a: SpectralModel, b: SpectralModel, grid):
    """(majorization verdict, tail-trace dominance verdict); they must agree."""
    maj = majorizes(a, b, grid).verdict
    us = _checkpoint_us(a, b, grid)
    # add level-crossing points t = 1/value for every plateau value of both
    extra = []
    for m in (a, b):
        sp = m.step_plateaus()
        if sp is not None:
            extra.append(-sp[2])
    if extra:
        us = np.unique(np.concatenate([us] + extra))
    ta = np.asarray(a.tail_trace_u(us), dtype=float)
    tb = np.asarray(b.tail_trace_u(us), dtype=float)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(ta))))
    dom = bool(np.min(ta - tb) >= -tol)
    return maj, dom


def mu_at(model: SpectralModel, t: float) -> float:
    return model.mu_at(t)


def distribution(model: SpectralModel, s: float) -> float:
    return model.distribution(s)


def partial_integral(model: SpectralModel, t: float) -> float:
    return model.partial_integral(t)


def marcinkiewicz_norm(model: SpectralModel, u_max: float = 50.0) -> float:
    if u_max <= 0:
        raise DomainError("u_max must be positive")
    return model.marcinkiewicz_norm(u_max)


# ---------------------------------------------------------------------------
# model file format


def model_from_json_obj(obj: dict) -> SpectralModel:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("model object must carry a 'kind' field")
    kind = obj["kind"]
    if kind == "finite":
        values = obj.get("values")
        if not isinstance(values, list) or not values:
            raise SchemaError("finite kind requires a nonempty 'values' list")
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise SchemaError(f"values[{i}]: must be a finite nonnegative number")
        return FiniteModel(values)
    if kind == "explicit":
        plateaus = obj.get("plateaus")
        if not isinstance(plateaus, list) or not plateaus:
            raise SchemaError("explicit kind requires a nonempty 'plateaus' list")
        try:
            step = StepFunction([p[0] for p in plateaus], [p[1] for p in plateaus])
        except SchemaError:
            raise
        except Exception as exc:
            raise SchemaError(f"malformed plateaus: {exc}") from exc
        return StepModel(step, kind="explicit")
    if kind == "power":
        return PowerTailModel(float(obj.get("c", 0.0)), float(obj.get("p", 0.0)))
    if kind == "harmonic":
        return HarmonicModel()
    if kind == "counterexample":
        from .counterexample import CounterexampleModel

        return CounterexampleModel(k_max=int(obj.get("k_max", 64)))
    raise SchemaError(f"unknown model kind {kind!r}")


def model_from_json(text: str) -> SpectralModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return model_from_json_obj(obj)
