"""Short-interval Fourier closeness machinery.

The quantity of interest is

    sup_alpha  integral_{-1/H}^{1/H} |(f-g)-hat (alpha + beta)|^2 d beta,

estimated two ways and reported together:

  * the Farey/Gallagher route: dissect the circle into mediant arcs of order
    floor(sqrt(H)); on the arc centered at r/q the integral is controlled by
    the window functional

        (1/(q^2 H)) * sum_t | sum_{t - w < n <= t} (f-g)(n) e(r n / q) |^2,

    with window width w = floor(q sqrt(H) / 3) and t stepping by 1;

  * a direct spot check: |(f-g)-hat|^2 on a dense FFT grid, integrated over
    [alpha - 1/H, alpha + 1/H] for alpha sampled inside the widest arcs.

The first is an upper bound up to the pinned Gallagher constant; the second is
a lower-bound probe.  Regressions in either are visible in the report.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .arithfn import ArithFn, _window_sums, l2_norm_sq, power_spectrum, subtract, twist_values
from .errors import DomainError
from .models import SieveSystem, lambda_q_short_sum, sieve_short_sum

# ---------------------------------------------------------------------------
# Farey dissection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FareyArc:
    """Mediant-bounded arc around the reduced fraction r/q.

    Arcs are half-open [lo, hi) and tile the circle; the arc centered at 0/1
    wraps, with lo < 0.  Every arc sits inside the interval of radius
    1/(q * order) around its center, and any point of the circle lies in at
    most two of those open containment intervals.
    """

    q: int
    r: int
    lo: float
    hi: float
    order: int

    @property
    def center(self) -> float:
        return self.r / self.q

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def containment_radius(self) -> float:
        return 1.0 / (self.q * self.order)

    def contains(self, alpha: float) -> bool:
        a = alpha % 1.0
        if self.lo < 0:
            return a < self.hi or a >= self.lo + 1.0
        return self.lo <= a < self.hi


def _farey_fractions(order: int) -> list[tuple[int, int]]:
    """The Farey sequence of the given order on [0, 1], ascending."""
    out = [(0, 1), (1, order)]
    while out[-1] != (1, 1):
        (a, b), (c, d) = out[-2], out[-1]
        k = (order + b) // d
        out.append((k * c - a, k * d - b))
    return out


def farey_dissection(order: int) -> list[FareyArc]:
    """Mediant arcs around every reduced fraction of denominator <= order.

    The circle convention is used: 0/1 and 1/1 are the same center, so the
    dissection has sum_{q <= order} phi(q) arcs covering [0, 1) exactly once.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    if order == 1:
        return [FareyArc(q=1, r=0, lo=-0.5, hi=0.5, order=1)]
    fracs = _farey_fractions(order)
    arcs = []
    for i, (r, q) in enumerate(fracs[:-1]):  # drop 1/1: same circle point as 0/1
        if i == 0:
            rp, qp = fracs[-2]
            lo = (rp - qp + r) / (qp + q)  # mediant with the left neighbour shifted by -1
        else:
            rp, qp = fracs[i - 1]
            lo = (rp + r) / (qp + q)
        rn, qn = fracs[i + 1]
        hi = (r + rn) / (q + qn)
        arcs.append(FareyArc(q=q, r=r, lo=lo, hi=hi, order=order))
    return arcs


# ---------------------------------------------------------------------------
# Gallagher's inequality
# ---------------------------------------------------------------------------


def gallagher_rhs(f: ArithFn, delta: float) -> float:
    """Delta^{-2} sum_t |sum_{t - floor(Delta/2) < n <= t} f(n)|^2."""
    span = len(f)
    if not (2 < delta < span / 2):
        raise DomainError("need 2 < Delta < span/2")
    width = max(1, int(delta / 2))
    sums = _window_sums(f.values.astype(np.complex128), width)
    return float(np.sum(np.abs(sums) ** 2) / delta**2)


def gallagher_lhs(f: ArithFn, delta: float, oversample: int = 8) -> float:
    """integral_{-1/Delta}^{1/Delta} |f-hat(beta)|^2 d beta by trapezoid quadrature.

    The grid is the FFT grid k/M with M >= oversample * span (>= 8 samples per
    1/span), plus exact handling of the interval endpoints.
    """
    span = len(f)
    if not (2 < delta < span / 2):
        raise DomainError("need 2 < Delta < span/2")
    if oversample < 8:
        raise DomainError("grid must supply at least 8 samples per 1/span")
    size, spec = power_spectrum(f, oversample=oversample)
    k_hi = math.floor(size / delta)
    k_lo = -k_hi
    ks = np.arange(k_lo, k_hi + 1)
    vals = spec[np.mod(ks, size)]
    inner = float(np.trapezoid(vals, dx=1.0 / size)) if len(ks) > 1 else 0.0
    # boundary slivers between +-1/Delta and the outermost grid points
    sliver = 1.0 / delta - k_hi / size
    inner += sliver * float(spec[k_hi % size] + spec[k_lo % size])
    return inner


# ---------------------------------------------------------------------------
# The closeness functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosenessReport:
    """Estimate of the short-interval closeness functional for a pair (f, g)."""

    sup_estimate: float
    theta_effective: float
    farey_bound: float
    spot_estimate: float
    reference_norm: float
    h: float
    order: int
    grid_resolution: int
    per_arc: tuple = field(repr=False)

    def to_json(self) -> str:
        payload = {
            "sup_estimate": self.sup_estimate,
            "theta_effective": self.theta_effective,
            "farey_bound": self.farey_bound,
            "spot_estimate": self.spot_estimate,
            "reference_norm": self.reference_norm,
            "h": self.h,
            "order": self.order,
            "grid_resolution": self.grid_resolution,
            "arc_count": len(self.per_arc),
        }
        return json.dumps(payload, sort_keys=True)

    def write_arc_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh)
        writer.writerow(["q", "r", "center", "lo", "hi", "contribution"])
        for arc, value in self.per_arc:
            writer.writerow([arc.q, arc.r, f"{arc.center:.12g}", f"{arc.lo:.12g}", f"{arc.hi:.12g}", f"{value:.12g}"])


def _arc_functional(diff: ArithFn, arc: FareyArc, h: float) -> float:
    width = max(1, int(arc.q * math.sqrt(h) / 3.0))
    twisted = twist_values(diff, arc.r, arc.q)
    sums = _window_sums(twisted, width)
    return float(np.sum(np.abs(sums) ** 2) / (arc.q**2 * h))


def closeness_integral(
    f: ArithFn,
    g: ArithFn,
    h: float,
    reference_norm: Optional[float] = None,
    spot_arcs: int = 16,
    max_samples_per_arc: int = 128,
    workers: int = 1,
) -> ClosenessReport:
    """Estimate sup_alpha of the windowed L^2 closeness of f and g (see module docstring)."""
    if h < 1:
        raise DomainError("need H >= 1 so the dissection order is at least 1")
    diff = subtract(f, g)
    span = len(diff)
    if span <= 2 * h:
        raise DomainError("supports must span more than 2H")
    order = int(math.isqrt(int(h)))
    arcs = farey_dissection(order)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            contribs = list(pool.map(lambda a: _arc_functional(diff, a, h), arcs))
    else:
        contribs = [_arc_functional(diff, a, h) for a in arcs]
    per_arc = tuple(zip(arcs, contribs))
    farey_bound = max(contribs)

    # direct spot check on the widest arcs
    size, spec = power_spectrum(diff, oversample=8)
    half = min(int(size / h), (size - 1) // 2)
    csum = np.concatenate([[0.0], np.cumsum(spec)])

    def window_integral(k: int) -> float:
        lo, hi = k - half, k + half  # inclusive bin range, circular
        lo_m, hi_m = lo % size, hi % size
        if lo_m <= hi_m:
            total = csum[hi_m + 1] - csum[lo_m]
        else:
            total = (csum[size] - csum[lo_m]) + csum[hi_m + 1]
        return float(total) / size

    spot = 0.0
    widest = sorted(arcs, key=lambda a: a.width, reverse=True)[:spot_arcs]
    for arc in widest:
        k_lo = math.ceil(arc.lo * size)
        k_hi = math.floor(arc.hi * size)
        if k_hi < k_lo:
            continue
        stride = max(1, (k_hi - k_lo) // max_samples_per_arc)
        for k in range(k_lo, k_hi + 1, stride):
            spot = max(spot, window_integral(k))

    sup_estimate = max(farey_bound, spot)
    ref = reference_norm if reference_norm is not None else (l2_norm_sq(f) or 1.0)
    return ClosenessReport(
        sup_estimate=sup_estimate,
        theta_effective=sup_estimate / ref,
        farey_bound=farey_bound,
        spot_estimate=spot,
        reference_norm=ref,
        h=float(h),
        order=order,
        grid_resolution=size,
        per_arc=per_arc,
    )


def character_window_energies(
    f: ArithFn,
    q: int,
    h: float,
    main_scale: float,
    exceptional: Sequence = (),
) -> list[tuple]:
    """Per-character window-sum energies at modulus q (optional diagnostics).

    For each character chi mod q returns (chi, sum_t |S_chi(t)|^2) with

        S_chi(t) = sum_{t - w < n <= t} ( f(n) chi(n) - delta_chi * main_scale ),

    w = floor(q sqrt(h) / 3) and delta_chi = 1 exactly for the principal
    character.  Characters appearing in `exceptional` (matched by label) are
    skipped: an exceptional set is an input hypothesis supplied by the caller,
    never something this toolkit tries to discover.  Windows range over the
    support of f.
    """
    from .characters import characters_mod

    if h < 1:
        raise DomainError("need h >= 1")
    width = max(1, int(q * math.sqrt(h) / 3.0))
    skip = {tuple(chi.label) for chi in exceptional}
    ns = f.indices()
    out = []
    for chi in characters_mod(q):
        if tuple(chi.label) in skip:
            continue
        vals = f.values * chi.values[ns % q]
        if chi.principal:
            vals = vals - main_scale
        sums = _window_sums(vals.astype(np.complex128), width)
        out.append((chi, float(np.sum(np.abs(sums) ** 2))))
    return out


# ---------------------------------------------------------------------------
# short-sum verification sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    params: dict
    actual: complex
    predicted: complex
    budget: float

    @property
    def error(self) -> float:
        return abs(self.actual - self.predicted)

    @property
    def ratio(self) -> float:
        return self.error / self.budget


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    ceiling: float

    @property
    def max_ratio(self) -> float:
        return max((row.ratio for row in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.ceiling

    def worst(self) -> Optional[SweepRow]:
        return max(self.rows, key=lambda r: r.ratio, default=None)

    def write_csv(self, fh: IO[str]) -> None:
        if not self.rows:
            return
        keys = sorted(self.rows[0].params)
        writer = csv.writer(fh)
        writer.writerow(keys + ["actual_re", "actual_im", "predicted_re", "error", "budget", "ratio"])
        for row in self.rows:
            writer.writerow(
                [row.params[k] for k in keys]
                + [
                    f"{row.actual.real:.10g}",
                    f"{row.actual.imag:.10g}",
                    f"{row.predicted.real:.10g}",
                    f"{row.error:.10g}",
                    f"{row.budget:.10g}",
                    f"{row.ratio:.10g}",
                ]
            )

    def summary(self) -> dict:
        worst = self.worst()
        return {
            "points": len(self.rows),
            "max_ratio": self.max_ratio,
            "ceiling": self.ceiling,
            "passed": self.passed,
            "worst_params": worst.params if worst else None,
        }


def verify_lambda_q_short_sums(sweep: Iterable[dict], ceiling: float) -> SweepReport:
    """Run the major-arc short-sum check on a grid of (t, h_prime, big_q, r, q_twist)."""
    rows = []
    for point in sweep:
        actual, predicted, budget = lambda_q_short_sum(
            t=point["t"], h_prime=point["h_prime"], big_q=point["big_q"],
            r=point["r"], q_twist=point["q_twist"],
        )
        rows.append(SweepRow(params=dict(point), actual=actual, predicted=predicted, budget=budget))
    return SweepReport(rows=tuple(rows), ceiling=ceiling)


def verify_sieve_short_sums(sweep: Iterable[tuple[SieveSystem, dict]], ceiling: float) -> SweepReport:
    """Run the sieve short-sum check on (sieve, point) pairs."""
    rows = []
    for sieve, point in sweep:
        actual, predicted, budget = sieve_short_sum(
            t=point["t"], h_prime=point["h_prime"], sieve=sieve,
            r=point["r"], q_twist=point["q_twist"],
        )
        params = dict(point)
        params.update({"beta": sieve.beta, "level": sieve.level, "sift": sieve.sift})
        rows.append(SweepRow(params=params, actual=actual, predicted=predicted, budget=budget))
    return SweepReport(rows=tuple(rows), ceiling=ceiling)


# ---------------------------------------------------------------------------
# default sweep grids (deterministic)
# ---------------------------------------------------------------------------


def default_lambda_q_sweep(big_q: int = 10, scale: str = "small") -> list[dict]:
    """>= 100 grid points exercising both twist branches of the short-sum check."""
    if scale == "small":
        ts = [100_003, 500_009]
        hs = [997.0, 10_000.0]
    elif scale == "medium":
        ts = [100_003, 500_009, 1_000_003]
        hs = [997.0, 10_000.0, 50_000.0]
    else:
        raise DomainError(f"unknown sweep scale {scale!r}")
    points = []
    for q_twist in range(1, big_q + 1):
        rs = [0] if q_twist == 1 else sorted({1, q_twist - 1, _smallest_coprime(q_twist, 2)})
        for r in rs:
            for t in ts:
                for h in hs:
                    points.append({"t": t, "h_prime": h, "big_q": big_q, "r": r, "q_twist": q_twist})
    for q_twist in (big_q + 1, big_q + 3, 2 * big_q + 3, 97):
        for r in (1, q_twist - 1):
            for t in ts:
                for h in hs:
                    points.append({"t": t, "h_prime": h, "big_q": big_q, "r": r, "q_twist": q_twist})
    return points


def _smallest_coprime(q: int, start: int) -> int:
    c = start
    while math.gcd(c, q) != 1:
        c += 1
    return c if c < q else 1


def default_sieve_sweep(scale: str = "small") -> list[tuple[SieveSystem, dict]]:
    """Sieve systems in the regime log D / log z >= beta + 1 plus both twist branches."""
    from .models import beta_sieve_weights

    systems = [
        beta_sieve_weights(10_000.0, 10.0, beta=3),  # untruncated at this level
        beta_sieve_weights(10_000.0, 12.0, beta=2),
        beta_sieve_weights(3_000.0, 30.0, beta=1),  # genuinely truncated
    ]
    if scale == "small":
        ts = [100_003, 500_009]
        hs = [2_000.0, 10_000.0]
    elif scale == "medium":
        ts = [100_003, 500_009, 1_000_003]
        hs = [2_000.0, 10_000.0, 30_000.0]
    else:
        raise DomainError(f"unknown sweep scale {scale!r}")
    points = []
    for sieve in systems:
        z = int(sieve.sift)
        small_q = [q for q in (1, 2, 3, 5, 7, 11, 13, 25) if q <= z]
        large_q = [q for q in (11, 13, 37, 101, 211) if q > z][:3]
        for q_twist in small_q + large_q:
            rs = [0] if q_twist == 1 else sorted({1, q_twist - 1})
            for r in rs:
                for t in ts:
                    for h in hs:
                        points.append((sieve, {"t": t, "h_prime": h, "r": r, "q_twist": q_twist}))
    return points
