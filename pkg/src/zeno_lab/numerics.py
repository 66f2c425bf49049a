"""Shared numerical kernels: adaptive quadrature and bracketing root finding.

The quadrature engine integrates complex-valued functions of one real
variable with a vectorized Gauss-Legendre 15/31 pair.  Integrands must
accept numpy arrays.  Semi-infinite ranges are mapped onto [0, 1) with
x = a + t/(1-t) (and the mirror image for a lower limit of -inf); the
mapping is part of the module contract so that reference values computed
against it are reproducible.  When ``oscillatory_hint`` is set on the
spec, the interval is pre-split at the period boundaries 2*pi/hint before
adaptive refinement starts; plain adaptive bisection stalls on integrands
carrying thousands of oscillation periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq


class DomainError(ValueError):
    """Integration limits are not an ordered interval."""


class NonConvergence(RuntimeError):
    """Requested accuracy was not reached within the subdivision budget."""


class NoSignChange(ValueError):
    """Root bracket does not enclose a sign change."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for :func:`integrate`.

    abs_tol / rel_tol: the returned error estimate must satisfy
        err <= max(abs_tol, rel_tol * |result|).
    max_subdivisions: budget of panel splits on top of the initial panels.
    oscillatory_hint: frequency scale of the integrand (radians per unit
        of the integration variable); enables period pre-splitting.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 20000
    oscillatory_hint: float | None = None

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class RootSpec:
    """Bracket and tolerance for :func:`find_root`."""

    bracket_lo: float
    bracket_hi: float
    tol: float = 1e-12

    def __post_init__(self):
        if not self.bracket_lo < self.bracket_hi:
            raise ValueError("bracket_lo must be < bracket_hi")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float


# Gauss-Legendre node/weight pairs reused across calls.  The 31-point rule
# supplies the value, the 15-point rule the error reference.
_X15, _W15 = leggauss(15)
_X31, _W31 = leggauss(31)

# Initial panel count is capped so a misplaced hint cannot allocate
# unbounded arrays; 2^18 panels of 31 nodes is ~250 MB of transient work.
_MAX_INITIAL_PANELS = 1 << 18


def _panel_eval(f, lo, hi):
    """Evaluate the GL15/GL31 pair on a batch of panels.

    lo, hi: 1-d arrays of panel bounds.  Returns (value, err) arrays where
    value is the 31-point estimate and err = |GL31 - GL15| per panel.
    """
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    x31 = mid[:, None] + half[:, None] * _X31[None, :]
    y31 = np.asarray(f(x31.ravel()), dtype=complex).reshape(x31.shape)
    v31 = half * (y31 @ _W31)

    x15 = mid[:, None] + half[:, None] * _X15[None, :]
    y15 = np.asarray(f(x15.ravel()), dtype=complex).reshape(x15.shape)
    v15 = half * (y15 @ _W15)

    return v31, np.abs(v31 - v15)


def _adaptive(f, a, b, spec):
    if spec.oscillatory_hint is not None and spec.oscillatory_hint > 0:
        period = 2.0 * math.pi / spec.oscillatory_hint
        n0 = int(math.ceil((b - a) / period))
        n0 = min(max(n0, 1), _MAX_INITIAL_PANELS)
    else:
        n0 = 1
    edges = np.linspace(a, b, n0 + 1)
    lo = edges[:-1]
    hi = edges[1:]
    val, err = _panel_eval(f, lo, hi)

    splits_used = 0
    while True:
        total = val.sum()
        total_err = err.sum()
        target = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= target:
            return QuadratureResult(complex(total), float(total_err))
        if splits_used >= spec.max_subdivisions:
            raise NonConvergence(
                f"quadrature error {total_err:.3e} above target {target:.3e} "
                f"after {splits_used} subdivisions"
            )
        # Split every panel holding more than its equidistributed share of
        # the error budget; always split at least the worst one.
        share = target / err.size
        mask = err > share
        if not mask.any():
            mask = err == err.max()
        n_split = int(mask.sum())
        if splits_used + n_split > spec.max_subdivisions:
            n_split = spec.max_subdivisions - splits_used
            order = np.argsort(err)[::-1][:n_split]
            mask = np.zeros_like(mask)
            mask[order] = True
        splits_used += int(mask.sum())

        slo, shi = lo[mask], hi[mask]
        smid = 0.5 * (slo + shi)
        new_lo = np.concatenate([lo[~mask], slo, smid])
        new_hi = np.concatenate([hi[~mask], smid, shi])
        new_val, new_err = _panel_eval(f, np.concatenate([slo, smid]),
                                       np.concatenate([smid, shi]))
        val = np.concatenate([val[~mask], new_val])
        err = np.concatenate([err[~mask], new_err])
        lo, hi = new_lo, new_hi


def integrate(f, a: float, b: float,
              spec: QuadratureSpec = QuadratureSpec()) -> QuadratureResult:
    """Integrate a complex-valued ``f`` over (a, b) adaptively.

    Raises DomainError for a >= b and NonConvergence when the achieved
    error estimate stays above max(abs_tol, rel_tol * |result|) after the
    subdivision budget is spent.
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")

    a_inf = math.isinf(a)
    b_inf = math.isinf(b)
    if a_inf and b_inf:
        left = integrate(f, a, 0.0, spec)
        right = integrate(f, 0.0, b, spec)
        return QuadratureResult(left.value + right.value, left.error + right.error)
    if b_inf:
        # x = a + t/(1-t), dx = dt/(1-t)^2, t in [0, 1)
        def g(t):
            u = 1.0 - t
            return f(a + t / u) / u**2
        return _adaptive(g, 0.0, 1.0, _no_hint(spec))
    if a_inf:
        # x = b - t/(1-t), mirrored transform
        def g(t):
            u = 1.0 - t
            return f(b - t / u) / u**2
        return _adaptive(g, 0.0, 1.0, _no_hint(spec))
    return _adaptive(f, a, b, spec)


def _no_hint(spec):
    # Period splitting only makes sense in the untransformed variable.
    if spec.oscillatory_hint is None:
        return spec
    return QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions, None)


def find_root(f, spec: RootSpec) -> float:
    """Bracketed root of a continuous scalar function.

    Raises NoSignChange when f has the same sign at both bracket ends and
    NonConvergence if the iteration budget of the underlying Brent solver
    is exhausted.
    """
    f_lo = f(spec.bracket_lo)
    f_hi = f(spec.bracket_hi)
    if f_lo == 0.0:
        return spec.bracket_lo
    if f_hi == 0.0:
        return spec.bracket_hi
    if f_lo * f_hi > 0.0:
        raise NoSignChange(
            f"f({spec.bracket_lo})={f_lo:.3e} and f({spec.bracket_hi})={f_hi:.3e} "
            "have the same sign"
        )
    try:
        root, res = brentq(f, spec.bracket_lo, spec.bracket_hi,
                           xtol=spec.tol, full_output=True)
    except RuntimeError as exc:  # scipy signals iteration exhaustion this way
        raise NonConvergence(str(exc)) from exc
    if not res.converged:
        raise NonConvergence("brentq did not converge")
    return float(root)
