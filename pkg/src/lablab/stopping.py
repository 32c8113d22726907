"""Exact law of the termination time via dynamic programming on the length walk.

The number of coups until the list empties depends only on the length
process: +1 on a loss, -2 on a win (floored at zero), absorbed at zero.
The forward DP tracks the probability mass of each unabsorbed length;
mass entering length zero at step n is credited to {N = n} and removed,
so survival[n] = P(N >= n) is the unabsorbed mass after n-1 steps.

For p > 1/3 the survival tail decays like n^(-3/2) * rho^(n/3) with
rho = 27/4 * p * (1-p)^2, up to a bounded factor that depends only on the
initial length and on n mod 3; ``asymptotic_fit`` estimates that factor
per residue class and reports how flat it is over a window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DivergentMeanError, InvalidConfigError, RhoAtLeastOneError


def rho(p):
    """Geometric decay base 27/4 * p * (1-p)^2 of the survival tail.

    Exact for Fraction input, float for float input.
    """
    if not 0 <= p <= 1:
        raise InvalidConfigError(f"p must be in [0, 1], got {p}", key="p")
    if isinstance(p, Fraction):
        return Fraction(27, 4) * p * (1 - p) ** 2
    return 27.0 / 4.0 * p * (1.0 - p) ** 2


@dataclass(frozen=True)
class SurvivalTable:
    """survival[n] = P(N >= n) for n = 0..n_max, from initial length l0."""

    l0: int
    p: float | Fraction
    survival: tuple
    exact: bool

    @property
    def n_max(self) -> int:
        return len(self.survival) - 1

    def pmf(self, n: int):
        """P(N = n) for 1 <= n <= n_max - 1."""
        return self.survival[n] - self.survival[n + 1]


def survival_dp(l0: int, p, n_max: int, exact: bool = False) -> SurvivalTable:
    """Forward DP over the length distribution on {0, 1, ..., l0 + n}.

    Loss (prob 1-p) maps l -> l+1; win (prob p) maps l -> l-2 for l >= 3 and
    absorbs from l in {1, 2}.  Exact mode runs the same recurrence in
    rational arithmetic.
    """
    if l0 < 1:
        raise InvalidConfigError(f"l0 must be >= 1, got {l0}", key="l0")
    if n_max < 1:
        raise InvalidConfigError(f"n_max must be >= 1, got {n_max}", key="n_max")
    if not 0 <= p <= 1:
        raise InvalidConfigError(f"p must be in [0, 1], got {p}", key="p")
    if exact:
        pe = p if isinstance(p, Fraction) else Fraction(p)
        surv = _survival_exact(l0, pe, n_max)
        return SurvivalTable(l0, pe, tuple(surv), True)
    pf = float(p)
    size = l0 + n_max + 2
    alive = np.zeros(size)
    alive[l0] = 1.0
    surv = np.empty(n_max + 1)
    surv[0] = 1.0
    for n in range(1, n_max + 1):
        surv[n] = alive.sum()
        new = np.zeros(size)
        new[1:] = (1.0 - pf) * alive[:-1]
        new[1:-2] += pf * alive[3:]
        alive = new
    return SurvivalTable(l0, pf, tuple(surv), False)


def _survival_exact(l0: int, p: Fraction, n_max: int) -> list[Fraction]:
    q = 1 - p
    alive = {l0: Fraction(1)}
    surv = [Fraction(1)]
    for _ in range(n_max):
        surv.append(sum(alive.values(), Fraction(0)))
        new: dict[int, Fraction] = {}
        for l, mass in alive.items():
            if q:
                new[l + 1] = new.get(l + 1, Fraction(0)) + q * mass
            if p and l >= 3:
                new[l - 2] = new.get(l - 2, Fraction(0)) + p * mass
        alive = new
    return surv


def enumerate_survival(l0: int, p, depth: int) -> list[Fraction]:
    """Brute-force oracle: exact survival by enumerating all outcome masks.

    Every one of the 2^depth win/loss sequences is walked; absorbed prefixes
    are shared by 2^(depth-n) masks and the duplicate count is divided out
    exactly.  Independent of the DP above.
    """
    if depth < 1 or depth > 26:
        raise InvalidConfigError(f"depth must be in [1, 26], got {depth}", key="depth")
    n_masks = 1 << depth
    masks = np.arange(n_masks, dtype=np.uint32)
    length = np.full(n_masks, l0, dtype=np.int32)
    wins = np.zeros(n_masks, dtype=np.int32)
    alive = np.ones(n_masks, dtype=bool)
    # counts[n][w] = number of paths absorbed at coup n with w wins
    counts: list[dict[int, int]] = [dict() for _ in range(depth + 1)]
    for step in range(depth):
        win = ((masks >> step) & 1).astype(bool)
        w = alive & win
        l = alive & ~win
        wins[w] += 1
        absorbed = w & (length <= 2)
        length[w] -= 2
        length[l] += 1
        if absorbed.any():
            n = step + 1
            dup = 1 << (depth - n)
            ws, cs = np.unique(wins[absorbed], return_counts=True)
            for wv, cv in zip(ws, cs):
                total = int(cv)
                assert total % dup == 0
                counts[n][int(wv)] = counts[n].get(int(wv), 0) + total // dup
            alive &= ~absorbed
    pe = p if isinstance(p, Fraction) else Fraction(p)
    qe = 1 - pe
    surv = [Fraction(1)]
    absorbed_mass = Fraction(0)
    for n in range(1, depth + 1):
        surv.append(1 - absorbed_mass)
        for wv, cnt in counts[n].items():
            absorbed_mass += cnt * pe**wv * qe ** (n - wv)
    return surv


@dataclass(frozen=True)
class AsymptoticFit:
    """Plateau of survival[n] / (n^(-3/2) * rho^(n/3)) over one residue class."""

    residue: int
    ns: tuple[int, ...]
    ratios: tuple[float, ...]
    plateau_estimate: float
    relative_spread: float


def asymptotic_fit(table: SurvivalTable, window: tuple[int, int]) -> dict[int, AsymptoticFit]:
    """Fit the tail constant per residue class of n mod 3 over ``window``.

    The plateau estimate is the geometric mean of the ratios; the relative
    spread is (max - min) / plateau.  Requires p > 1/3 so the asymptote decays.
    """
    p = float(table.p)
    if p <= 1.0 / 3.0:
        raise RhoAtLeastOneError(f"tail asymptote requires p > 1/3, got p = {p}")
    n_lo, n_hi = window
    if not (1 <= n_lo <= n_hi <= table.n_max):
        raise InvalidConfigError(f"window {window} outside table range", key="window")
    r = rho(p)
    fits: dict[int, AsymptoticFit] = {}
    for residue in range(3):
        ns = [n for n in range(n_lo, n_hi + 1) if n % 3 == residue]
        ratios = []
        for n in ns:
            s = float(table.survival[n])
            if s <= 0.0:
                raise InvalidConfigError(
                    f"survival underflowed at n = {n}; shrink the window", key="window"
                )
            ratios.append(s / (n**-1.5 * r ** (n / 3.0)))
        plateau = math.exp(sum(math.log(x) for x in ratios) / len(ratios))
        spread = (max(ratios) - min(ratios)) / plateau
        fits[residue] = AsymptoticFit(residue, tuple(ns), tuple(ratios), plateau, spread)
    return fits


@dataclass(frozen=True)
class MeanEstimate:
    """Truncated series value plus a certified bound on the dropped tail."""

    value: float
    tail_bound: float
    terms: int


def mean_stopping_time(l0: int, p, tolerance: float = 1e-10, max_terms: int = 1_000_000) -> MeanEstimate:
    """E[N] = sum of P(N >= n), truncated once the certified tail bound is met.

    The tail is controlled by the binomial Chernoff bound: staying alive for m
    coups forces wins_m <= (l0 + m)/3, and P(Bin(m, p) <= a*m) <= exp(-m*D(a||p))
    for a <= p, which at a -> 1/3 has exponent -log(rho)/3 > 0 for p > 1/3.
    Raises DivergentMeanError for p <= 1/3 where the mean is infinite.
    """
    pf = float(p)
    if pf <= 1.0 / 3.0:
        raise DivergentMeanError(f"E[N] is infinite for p <= 1/3 (got p = {pf})")
    if tolerance <= 0:
        raise InvalidConfigError("tolerance must be positive", key="tolerance")
    if l0 < 1:
        raise InvalidConfigError(f"l0 must be >= 1, got {l0}", key="l0")
    size0 = l0 + 2
    alive = np.zeros(size0)
    alive[l0] = 1.0
    total = 0.0
    n = 0
    while n < max_terms:
        mass = float(alive.sum())
        if mass == 0.0:
            return MeanEstimate(total, 0.0, n)
        total += mass  # P(N >= n+1) = alive mass after n steps
        n += 1
        bound = _chernoff_tail(l0, pf, n)
        if bound < tolerance:
            return MeanEstimate(total, bound, n)
        if alive.shape[0] < l0 + n + 2:
            alive = np.append(alive, np.zeros(alive.shape[0]))
        new = np.zeros_like(alive)
        new[1:] = (1.0 - pf) * alive[:-1]
        new[1:-2] += pf * alive[3:]
        alive = new
    raise InvalidConfigError(
        f"tail bound {bound:.3e} not below tolerance after {max_terms} terms", key="max_terms"
    )


def _chernoff_tail(l0: int, p: float, n_star: int) -> float:
    """Upper bound on sum_{n > n_star} P(N >= n)."""
    if p >= 1.0:
        return 0.0
    a = (l0 + n_star) / (3.0 * n_star)
    if a >= p:
        return math.inf
    d = a * math.log(a / p) + (1.0 - a) * math.log((1.0 - a) / (1.0 - p))
    r = math.exp(-d)
    return r**n_star / (1.0 - r)
