"""Small dense Hermitian matrix calculus and randomized inequality suites.

The eigensolver is a cyclic Jacobi iteration with complex rotations,
accurate to near machine precision for the dimensions used here
(n <= 64).  The inequality checks exercise trace and Loewner-order
statements about fractional powers, congruences B^{1/2} A B^{1/2} and
convex functional calculus on random positive matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .parallel import ordered_map

_HERM_TOL = 1e-12


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("expected a square matrix")
    return a


def _check_hermitian(a: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if float(np.max(np.abs(a - a.conj().T))) > _HERM_TOL * scale:
        raise DomainError("matrix is not Hermitian within tolerance")


def eigendecompose(h, off_threshold: float = 1e-14, max_sweeps: int = 100):
    """Eigenvalues (nonincreasing) and unitary basis of a Hermitian matrix.

    Cyclic Jacobi rotations; sweeps stop once the off-diagonal Frobenius
    norm falls below off_threshold times the matrix norm.
    """
    a = _as_square(h).copy()
    _check_hermitian(a)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    norm = math.sqrt(float(np.sum(np.abs(a) ** 2)))
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off2 = float(np.sum(np.abs(a) ** 2)) - float(np.sum(np.abs(np.diag(a)) ** 2))
        if math.sqrt(max(off2, 0.0)) <= off_threshold * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = a[p, q]
                r = abs(hpq)
                if r <= 1e-18 * norm:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                phase = hpq / r
                theta = (a[p, p].real - a[q, q].real) / (2.0 * r)
                if theta == 0.0:
                    tau = 1.0
                else:
                    tau = -math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(1.0 + tau * tau)
                s = tau * c * phase
                # columns: A <- A U with U = [[c, s], [-conj(s), c]] on (p, q)
                col_p = a[:, p] * c - a[:, q] * np.conj(s)
                col_q = a[:, p] * s + a[:, q] * c
                a[:, p] = col_p
                a[:, q] = col_q
                # rows: A <- U* A
                row_p = a[p, :] * c - a[q, :] * s
                row_q = a[p, :] * np.conj(s) + a[q, :] * c
                a[p, :] = row_p
                a[q, :] = row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p] * c - v[:, q] * np.conj(s)
                vcol_q = v[:, p] * s + v[:, q] * c
                v[:, p] = vcol_p
                v[:, q] = vcol_q
    evals = np.real(np.diag(a))
    order = np.argsort(-evals, kind="stable")
    return evals[order], v[:, order]


def matrix_function(h, f):
    """Functional calculus U f(diag) U*; f must be finite on the spectrum."""
    evals, u = eigendecompose(h)
    with np.errstate(all="ignore"):
        fv = np.asarray([f(float(x)) for x in evals], dtype=float)
    if not np.all(np.isfinite(fv)):
        raise DomainError("f is undefined or non-finite at an eigenvalue")
    out = (u * fv) @ u.conj().T
    return 0.5 * (out + out.conj().T)


def singular_values(m) -> np.ndarray:
    """Nonincreasing eigenvalues of (M* M)^{1/2} for any finite matrix."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DomainError("expected a matrix")
    gram = a.conj().T @ a
    evals, _ = eigendecompose(0.5 * (gram + gram.conj().T))
    return np.sqrt(np.clip(evals, 0.0, None))


def _psd_eigs(h, what: str = "matrix"):
    evals, u = eigendecompose(h)
    top = max(float(evals[0]), 0.0)
    if evals[-1] < -1e-10 * max(top, 1.0):
        raise DomainError(f"{what} is not positive semidefinite")
    return np.clip(evals, 0.0, None), u


def _psd_power(evals, u, alpha: float):
    out = (u * evals**alpha) @ u.conj().T
    return 0.5 * (out + out.conj().T)


@dataclass
class InequalityReport:
    """Aggregate of randomized trials for one inequality family.

    worst_margin is the most negative slack observed, normalized per
    trial by max(|lhs|, |rhs|, 1); the suite passes when it stays above
    -tolerance.
    """

    family: str
    trials: int
    worst_margin: float
    tolerance: float = 1e-9
    failures: list = field(default_factory=list)
    s_values: tuple = ()
    dims: tuple = ()
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tolerance

    def to_json_obj(self) -> dict:
        return {
            "family": self.family,
            "trials": self.trials,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "failures": list(self.failures),
            "s_values": list(self.s_values),
            "dims": list(self.dims),
            "seed": self.seed,
        }


def _single_report(family: str, margin: float, s: float) -> InequalityReport:
    return InequalityReport(family=family, trials=1, worst_margin=margin, s_values=(s,))


def power_trace_bounds_check(a, c, s: float) -> InequalityReport:
    """Tr(A^{1+s}) + Tr(C^{1+s}) <= Tr((A+C)^{1+s}) <= 2^s (lhs)."""
    a = _as_square(a)
    c = _as_square(c)
    if a.shape != c.shape:
        raise DomainError("dimension mismatch")
    if s <= 0:
        raise DomainError("s must be positive")
    ea, _ = _psd_eigs(a, "A")
    ec, _ = _psd_eigs(c, "C")
    esum, _ = _psd_eigs(a + c, "A+C")
    tr_split = float(np.sum(ea ** (1 + s)) + np.sum(ec ** (1 + s)))
    tr_joint = float(np.sum(esum ** (1 + s)))
    scale = max(abs(tr_split), abs(tr_joint), 1.0)
    slack1 = (tr_joint - tr_split) / scale
    slack2 = (2.0**s * tr_split - tr_joint) / scale
    return _single_report("power", min(slack1, slack2), s)


def loewner_cps_check(a, b, s: float) -> InequalityReport:
    """Loewner comparison of (B^{1/2} A B^{1/2})^{1+s} vs B^{1/2} A^{1+s} B^{1/2}."""
    a = _as_square(a)
    b = _as_square(b)
    if a.shape != b.shape:
        raise DomainError("dimension mismatch")
    if s <= 0:
        raise DomainError("s must be positive")
    ea, ua = _psd_eigs(a, "A")
    eb, ub = _psd_eigs(b, "B")
    if eb[0] <= 1.0 + 1e-9:
        branch_below = True
    elif eb[-1] >= 1.0 - 1e-9:
        branch_below = False
    else:
        raise DomainError("B must satisfy B <= 1 or B >= 1")
    b_half = _psd_power(eb, ub, 0.5)
    a_pow = _psd_power(ea, ua, 1.0 + s)
    inner = b_half @ a @ b_half
    inner = 0.5 * (inner + inner.conj().T)
    ei, ui = _psd_eigs(inner, "B^{1/2}AB^{1/2}")
    inner_pow = _psd_power(ei, ui, 1.0 + s)
    outer = b_half @ a_pow @ b_half
    outer = 0.5 * (outer + outer.conj().T)
    diff = (outer - inner_pow) if branch_below else (inner_pow - outer)
    ed, _ = eigendecompose(diff)
    scale = max(
        1.0,
        math.sqrt(float(np.sum(np.abs(outer) ** 2))),
        math.sqrt(float(np.sum(np.abs(inner_pow) ** 2))),
    )
    return _single_report("loewner", float(ed[-1]) / scale, s)


def convex_trace_check(a, b, f) -> InequalityReport:
    """Trace comparison Tr(B^{1/2} f(A) B^{1/2}) vs Tr(f(B^{1/2} A B^{1/2})).

    f is assumed convex with f(0) = 0 (caller contract, not verified).
    """
    a = _as_square(a)
    b = _as_square(b)
    if a.shape != b.shape:
        raise DomainError("dimension mismatch")
    ea, ua = _psd_eigs(a, "A")
    eb, ub = _psd_eigs(b, "B")
    if eb[0] <= 1.0 + 1e-9:
        branch_below = True
    elif eb[-1] >= 1.0 - 1e-9:
        branch_below = False
    else:
        raise DomainError("B must satisfy B <= 1 or B >= 1")
    b_half = _psd_power(eb, ub, 0.5)
    fa = matrix_function(a, f)
    lhs = float(np.trace(b_half @ fa @ b_half).real)
    inner = b_half @ a @ b_half
    inner = 0.5 * (inner + inner.conj().T)
    ei, _ = _psd_eigs(inner, "B^{1/2}AB^{1/2}")
    rhs = float(math.fsum(f(float(x)) for x in ei))
    scale = max(abs(lhs), abs(rhs), 1.0)
    slack = (lhs - rhs) if branch_below else (rhs - lhs)
    return _single_report("convex", slack / scale, float("nan"))


def zeta_sandwich_check(a, b, s: float, m: float | None = None, big_m: float | None = None) -> InequalityReport:
    """m^s Tr(A^{1+s} B) <= Tr((B^{1/2} A B^{1/2})^{1+s}) <= M^s Tr(A^{1+s} B)."""
    a = _as_square(a)
    b = _as_square(b)
    if a.shape != b.shape:
        raise DomainError("dimension mismatch")
    if s <= 0:
        raise DomainError("s must be positive")
    ea, ua = _psd_eigs(a, "A")
    eb, ub = _psd_eigs(b, "B")
    lam_min, lam_max = float(eb[-1]), float(eb[0])
    if m is None:
        m = lam_min
    if big_m is None:
        big_m = lam_max
    tol = 1e-9 * max(lam_max, 1.0)
    if not (0 < m <= lam_min + tol and big_m >= lam_max - tol):
        raise DomainError("m, M are inconsistent with the spectrum of B")
    a_pow = _psd_power(ea, ua, 1.0 + s)
    tr_ab = float(np.trace(a_pow @ b).real)
    b_half = _psd_power(eb, ub, 0.5)
    inner = b_half @ a @ b_half
    inner = 0.5 * (inner + inner.conj().T)
    ei, _ = _psd_eigs(inner, "B^{1/2}AB^{1/2}")
    mid = float(np.sum(ei ** (1 + s)))
    scale = max(abs(mid), abs(tr_ab), 1.0)
    low = (mid - m**s * tr_ab) / scale
    high = (big_m**s * tr_ab - mid) / scale
    return _single_report("sandwich", min(low, high), s)


# ---------------------------------------------------------------------------
# randomized suites


def random_hermitian_psd(rng: np.random.Generator, n: int, complex_entries: bool = True) -> np.ndarray:
    g = rng.standard_normal((n, n))
    if complex_entries:
        g = g + 1j * rng.standard_normal((n, n))
    a = g @ g.conj().T / n
    return 0.5 * (a + a.conj().T)


def _scaled_below_one(b: np.ndarray) -> np.ndarray:
    return b / float(np.trace(b).real)  # PSD trace dominates the top eigenvalue


def _shifted_above_one(b: np.ndarray) -> np.ndarray:
    return b + np.eye(b.shape[0])


_DEFAULT_S = (0.1, 0.5, 1.0, 2.0)


def _trial_seed(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))


def run_inequality_suite(
    family: str,
    trials: int = 500,
    dim_range: tuple = (2, 6),
    s_values: tuple = _DEFAULT_S,
    seed: int = 0,
) -> InequalityReport:
    """Randomized suite for one family: power | loewner | convex | sandwich."""
    if family not in ("power", "loewner", "convex", "sandwich"):
        raise DomainError(f"unknown family {family!r}")

    def one_trial(i: int) -> float:
        rng = _trial_seed(seed, i)
        n = int(rng.integers(dim_range[0], dim_range[1] + 1))
        cplx = bool(rng.integers(0, 2))
        a = random_hermitian_psd(rng, n, cplx)
        b = random_hermitian_psd(rng, n, cplx)
        worst = math.inf
        if family == "power":
            for s in s_values:
                worst = min(worst, power_trace_bounds_check(a, b, s).worst_margin)
        elif family == "loewner":
            below = _scaled_below_one(b)
            above = _shifted_above_one(b)
            for s in s_values:
                worst = min(worst, loewner_cps_check(a, below, s).worst_margin)
                worst = min(worst, loewner_cps_check(a, above, s).worst_margin)
        elif family == "convex":
            theta = 0.3 * float(rng.uniform(0.2, 1.5))
            fs = [lambda u, th=theta: max(u - th, 0.0), lambda u: u * u]
            f = fs[i % 2]
            worst = min(
                worst,
                convex_trace_check(a, _scaled_below_one(b), f).worst_margin,
                convex_trace_check(a, _shifted_above_one(b), f).worst_margin,
            )
        else:
            for s in s_values:
                worst = min(worst, zeta_sandwich_check(a, b + 0.05 * np.eye(n), s).worst_margin)
        return worst

    margins = ordered_map(one_trial, range(trials))
    worst = min(margins) if margins else 0.0
    failures = [i for i, w in enumerate(margins) if w < -1e-9]
    return InequalityReport(
        family=family,
        trials=trials,
        worst_margin=float(worst),
        failures=failures,
        s_values=tuple(s_values),
        dims=dim_range,
        seed=seed,
    )
