"""Closed-form model whose Dixmier average and tail trace separate.

The singular-value function takes the value exp(-e^k) on the abscissa
interval [exp(k-1+e^{k-1}), exp(k+e^k)) for k = 2, 3, ...; the first
plateau extends down to abscissa 0.  Every derived quantity is computed
from k on demand as exponentials of differences, so probes up to
u = e^700 in log-abscissa stay inside double range.

The Dixmier average of this model oscillates with liminf 1/(e-1) while
the normalized tail trace reaches e/(e-1) on the same scales; sampling
both at u_k = e^k + k/2 exhibits the gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .logdomain import NEG_INF
from .stepfn import SpectralModel, _match_shape

K_MAX_DEFAULT = 64

E = math.e
_E_POW = np.exp(np.arange(1, K_MAX_DEFAULT + 1, dtype=float))  # e^k, k = 1..64
_B = np.arange(1, K_MAX_DEFAULT + 1, dtype=float) + _E_POW  # plateau right ends k + e^k
_STARTS = np.concatenate(([NEG_INF], _B[:-1]))  # plateau left ends (first at abscissa 0)


def _plateau_masses() -> np.ndarray:
    # mass of plateau n: e^n - exp(n-1+e^{n-1}-e^n); the first plateau keeps
    # its full [0, e^{1+e}) width, so its mass is exactly e.
    ks = np.arange(1, K_MAX_DEFAULT + 1, dtype=float)
    masses = np.exp(ks)
    masses[1:] -= np.exp(_B[:-1] - _E_POW[1:])
    return masses


_MASSES = _plateau_masses()
_S0 = np.concatenate(([0.0], np.cumsum(_MASSES)))  # S0[j] = mass of plateaus 1..j


def plateau_index(u) -> int:
    """The k whose plateau covers log-abscissa u; 1 below the first start."""
    u_arr = np.asarray(u, dtype=float)
    k = 1 + np.searchsorted(_B, u_arr, side="right")
    if np.any(k > K_MAX_DEFAULT):
        # beyond the table: solve k-1+e^{k-1} <= u < k+e^k directly
        k = np.asarray(k, dtype=np.int64)
        flat = np.atleast_1d(k)
        uu = np.atleast_1d(u_arr)
        for i in np.nonzero(flat > K_MAX_DEFAULT)[0]:
            kk = max(1, int(math.log(max(uu[i], 1.0))))
            while kk + math.exp(kk) <= uu[i]:
                kk += 1
            while kk > 1 and (kk - 1) + math.exp(kk - 1) > uu[i]:
                kk -= 1
            flat[i] = kk
        k = flat.reshape(k.shape)
    out = np.asarray(k, dtype=np.int64)
    if np.ndim(u) == 0:
        return int(out)
    return out


def _level_count(u) -> np.ndarray:
    """K(u) = number of plateau values strictly above the level e^{-u}."""
    u_arr = np.asarray(u, dtype=float)
    return np.searchsorted(_E_POW, u_arr, side="left")


def cx_partial_integral(u):
    """Integral of the model from abscissa 0 to e^u, exact finite sums."""
    u_arr = np.asarray(u, dtype=float)
    k = np.minimum(plateau_index(u_arr), K_MAX_DEFAULT + 1)
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    uu = np.atleast_1d(u_arr)
    base = _S0[k - 1]
    active = k <= K_MAX_DEFAULT
    part = np.zeros_like(uu)
    if np.any(active):
        ka = k[active]
        ua = uu[active]
        ek = np.exp(ka.astype(float))
        part_a = np.exp(ua - ek)
        higher = ka >= 2
        if np.any(higher):
            starts = (ka[higher] - 1) + np.exp(ka[higher].astype(float) - 1.0)
            part_a[higher] -= np.exp(starts - ek[higher])
        part[active] = part_a
    out = base + part
    return _match_shape(u, out.reshape(np.shape(u)) if np.ndim(u) else out[0])


def cx_tail_trace(u):
    """Integral of (mu - e^{-u}) over the strict level set {mu > e^{-u}}."""
    u_arr = np.asarray(u, dtype=float)
    K = np.atleast_1d(_level_count(u_arr))
    uu = np.atleast_1d(u_arr)
    out = np.zeros_like(uu)
    pos = K >= 1
    if np.any(pos):
        Kp = K[pos].astype(np.int64)
        cut = np.exp(Kp + _E_POW[Kp - 1] - uu[pos])
        out[pos] = np.maximum(_S0[Kp] - cut, 0.0)
    return _match_shape(u, out.reshape(np.shape(u)) if np.ndim(u) else out[0])


@dataclass
class CxMembershipReport:
    """Dixmier-ideal bound probes and the 1/n-decay failure witness."""

    ratio_probes: list = field(default_factory=list)  # (k, partial/log(1+t)) at t = e^{k+e^k}
    ratio_bound: float = E**2 / (E - 1.0)
    bound_ok: bool = True
    witness_probes: list = field(default_factory=list)  # (k, s*mu(s)) at s = e^{k+e^k}-1
    in_weak_l1: bool = False


def cx_membership_report(k_probes=range(1, 21), witness_ks=range(3, 13)) -> CxMembershipReport:
    report = CxMembershipReport()
    for k in k_probes:
        u = k + math.exp(k)
        ratio = cx_partial_integral(u) / (u + math.log1p(math.exp(-u)))
        report.ratio_probes.append((int(k), float(ratio)))
    report.bound_ok = all(r <= report.ratio_bound + 1.0 for _, r in report.ratio_probes)
    for k in witness_ks:
        # s = e^{k+e^k} - 1 sits inside plateau k, so s*mu(s) = exp(k + log1p(-exp(-k-e^k)))
        val = math.exp(k + math.log1p(-math.exp(-(k + math.exp(k)))))
        report.witness_probes.append((int(k), float(val)))
    return report


class CounterexampleModel(SpectralModel):
    """Spectral model backed by the closed forms above."""

    kind = "counterexample"
    in_dixmier_ideal = True

    def __init__(self, k_max: int = K_MAX_DEFAULT):
        if not 4 <= k_max <= K_MAX_DEFAULT:
            raise DomainError(f"k_max must lie in [4, {K_MAX_DEFAULT}]")
        self.k_max = int(k_max)

    def mu_log_at(self, u):
        u_arr = np.asarray(u, dtype=float)
        k = np.atleast_1d(plateau_index(u_arr))
        out = np.where(k <= self.k_max, -np.exp(np.minimum(k, self.k_max).astype(float)), NEG_INF)
        return _match_shape(u, out.reshape(np.shape(u)) if np.ndim(u) else out[0])

    def distribution_log(self, ls):
        ls_arr = np.asarray(ls, dtype=float)
        K = np.atleast_1d(np.minimum(_level_count(-ls_arr), self.k_max)).astype(np.int64)
        out = np.where(K >= 1, np.maximum(K, 1) + _E_POW[np.maximum(K, 1) - 1], NEG_INF)
        return _match_shape(ls, out.reshape(np.shape(ls)) if np.ndim(ls) else out[0])

    def partial_integral_u(self, u):
        if self.k_max == K_MAX_DEFAULT:
            return cx_partial_integral(u)
        u_arr = np.asarray(u, dtype=float)
        capped = np.minimum(u_arr, _B[self.k_max - 1])
        return _match_shape(u, cx_partial_integral(capped))

    def tail_trace_u(self, u):
        if self.k_max == K_MAX_DEFAULT:
            return cx_tail_trace(u)
        u_arr = np.asarray(u, dtype=float)
        K = np.atleast_1d(np.minimum(_level_count(u_arr), self.k_max)).astype(np.int64)
        uu = np.atleast_1d(u_arr)
        out = np.zeros_like(uu)
        pos = K >= 1
        if np.any(pos):
            Kp = K[pos]
            out[pos] = np.maximum(_S0[Kp] - np.exp(Kp + _E_POW[Kp - 1] - uu[pos]), 0.0)
        return _match_shape(u, out.reshape(np.shape(u)) if np.ndim(u) else out[0])

    def marcinkiewicz_norm(self, u_max: float = 50.0) -> float:
        # Boundary ratios S_k/log(1+e^{k+e^k}) < e/(e-1) increase to that
        # limit, and plateau interiors cannot beat boundaries.
        return E / (E - 1.0)

    def boundary_us(self) -> np.ndarray:
        return _B[: self.k_max].copy()

    def feature_points(self, u0: float, u1: float) -> np.ndarray:
        pts = np.concatenate([_B[: self.k_max], _B[: self.k_max - 1], _E_POW[: self.k_max]])
        pts = np.unique(pts)
        return pts[(pts >= u0) & (pts <= u1)]

    def step_plateaus(self):
        n = self.k_max
        ks = np.arange(1, n + 1, dtype=float)
        lw = np.empty(n)
        lw[0] = 1.0 + E
        lw[1:] = _B[1:n] + np.log1p(-np.exp(_B[: n - 1] - _B[1:n]))
        return _STARTS[:n].copy(), _B[:n].copy(), -_E_POW[:n].copy(), lw

    def spectral_sum(self, f, scale: float = 1.0) -> float:
        _, _, ws, lws = self.step_plateaus()
        lsc = math.log(scale)
        terms = []
        for w, lw in zip(ws, lws):
            v = math.exp(w + lsc) if w + lsc > -745 else 0.0
            fv = float(f(v))
            if fv > 0.0:
                terms.append(math.exp(lw + math.log(fv)))
        return math.fsum(terms)

    def to_json_obj(self) -> dict:
        return {"kind": "counterexample", "k_max": self.k_max}
