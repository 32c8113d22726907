"""Exact state machines for cancellation-style betting lists.

Two concrete systems are implemented on explicit lists (the classic
cancellation rule acting on both ends, and the variant acting on the last
two entries), together with the abstract target/length process that only
tracks the remaining target ``T`` and the list length ``l``.  All update
rules are closed under ``int``/``Fraction`` arithmetic, so exact runs are
available wherever float drift would matter; float entries give the fast
Monte Carlo mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    AlreadyTerminatedError,
    BetOutOfRangeError,
    EmptyListError,
    InvalidConfigError,
    InvalidLengthError,
    TerminationViolationError,
)

Amount = int | float | Fraction


class Outcome(Enum):
    WIN = "win"
    LOSS = "loss"


def check_betting_list(entries: Sequence[Amount]) -> tuple[Amount, ...]:
    """Validate list entries (strictly positive); empty lists are allowed."""
    entries = tuple(entries)
    for x in entries:
        if not x > 0:
            raise InvalidConfigError(f"list entries must be positive, got {x!r}", key="list")
    return entries


def labouchere_bet(entries: Sequence[Amount]) -> Amount:
    """Bet of the two-ended cancellation rule: first + last entry.

    A single remaining entry is bet in full.
    """
    if not entries:
        raise EmptyListError("cannot bet on an empty list")
    if len(entries) == 1:
        return entries[0]
    return entries[0] + entries[-1]


def labouchere_step(entries: Sequence[Amount], outcome: Outcome) -> tuple[Amount, ...]:
    """Advance a cancellation list by one coup.

    Win: both end entries are removed (a lone entry is removed entirely).
    Loss: the lost bet is appended.
    """
    if not entries:
        raise EmptyListError("cannot step an empty list")
    if outcome is Outcome.WIN:
        return tuple(entries[1:-1])
    return tuple(entries) + (labouchere_bet(entries),)


def fibonacci_bet(entries: Sequence[Amount]) -> Amount:
    """Bet of the last-two rule: sum of the final two entries."""
    if not entries:
        raise EmptyListError("cannot bet on an empty list")
    if len(entries) == 1:
        return entries[0]
    return entries[-2] + entries[-1]


def fibonacci_step(entries: Sequence[Amount], outcome: Outcome) -> tuple[Amount, ...]:
    """Advance a last-two list: win cancels the final two entries, loss appends the bet."""
    if not entries:
        raise EmptyListError("cannot step an empty list")
    if outcome is Outcome.WIN:
        return tuple(entries[:-2])
    return tuple(entries) + (fibonacci_bet(entries),)


@dataclass(frozen=True)
class SystemState:
    """Abstract state (target, length) of a list system.

    ``terminated`` is equivalent to ``length == 0`` and to ``target == 0``;
    the constructor enforces the equivalence.
    """

    target: Amount
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise InvalidConfigError(f"length must be >= 0, got {self.length}", key="length")
        if not self.target >= 0:
            raise InvalidConfigError(f"target must be >= 0, got {self.target!r}", key="target")
        if (self.length == 0) != (self.target == 0):
            raise InvalidConfigError(
                f"length {self.length} and target {self.target!r} must hit zero together"
            )

    @property
    def terminated(self) -> bool:
        return self.length == 0


def list_system_step(state: SystemState, bet: Amount, outcome: Outcome) -> SystemState:
    """One coup of the abstract system.

    Win: target -= bet, length drops by 2 (floored at 0).
    Loss: target += bet, length grows by 1.
    At lengths 1 and 2 the full target must be bet, so a win always clears
    the target exactly when it clears the length.
    """
    if state.terminated:
        raise AlreadyTerminatedError("system already terminated")
    if not (0 <= bet <= state.target):
        raise BetOutOfRangeError(f"bet {bet!r} outside [0, {state.target!r}]")
    if state.length <= 2 and bet != state.target:
        raise TerminationViolationError(
            f"length {state.length} requires the full target {state.target!r}, got bet {bet!r}"
        )
    if outcome is Outcome.WIN:
        new_len = state.length - 2 if state.length > 2 else 0
        new_target = state.target - bet
        if new_len == 0:
            new_target = 0 * new_target  # exact zero of the same numeric type
        return SystemState(new_target, new_len)
    return SystemState(state.target + bet, state.length + 1)


def proportion_cap(length: int) -> float:
    """Length-dependent cap sqrt(2/l) + 2/l on the bet-to-target proportion, clipped at 1."""
    if length < 1:
        raise InvalidLengthError(f"length must be >= 1, got {length}")
    return min(math.sqrt(2.0 / length) + 2.0 / length, 1.0)


def proportion_cap_holds(bet: Amount, target: Amount, length: int) -> bool:
    """Exact test of bet/target <= sqrt(2/l) + 2/l for rational inputs.

    The irrational bound is compared by squaring: with x = bet/target - 2/l,
    the inequality is x <= 0 or x^2 <= 2/l, which is decidable in rational
    arithmetic.  Floats fall back to the float formula.
    """
    if length < 1:
        raise InvalidLengthError(f"length must be >= 1, got {length}")
    if isinstance(bet, float) or isinstance(target, float):
        return bet / target <= proportion_cap(length) + 1e-12
    x = Fraction(bet, 1) / Fraction(target, 1) - Fraction(2, length)
    if x <= 0:
        return True
    return x * x <= Fraction(2, length)


@dataclass(frozen=True)
class BetConstraints:
    """Proportion bounds per list length, plus an optional linear bet floor.

    ``lower`` and ``upper`` map a length l >= 1 to proportions in [0, 1];
    ``linear_floor`` is a pair (c1, c2) demanding bet >= c1*l + c2.
    """

    lower: Callable[[int], float]
    upper: Callable[[int], float]
    linear_floor: tuple[float, float] | None = None
    name: str = "custom"

    @classmethod
    def unconstrained(cls) -> "BetConstraints":
        return cls(lower=lambda l: 0.0, upper=lambda l: 1.0, name="unconstrained")

    @classmethod
    def good_list_cap(cls) -> "BetConstraints":
        """Upper cap sqrt(2/l) + 2/l, the proportion bound obeyed by good lists."""
        return cls(lower=lambda l: 0.0, upper=proportion_cap, name="good-list")

    @classmethod
    def constant_floor(cls, c: float) -> "BetConstraints":
        return cls(lower=lambda l, c=c: c, upper=lambda l: 1.0, name=f"floor:{c}")


@dataclass(frozen=True)
class BetViolation:
    """Names the bound violated by a bet; ``validate_bet`` returns None when ok."""

    bound: str
    bet: Amount
    limit: Amount

    def __str__(self) -> str:
        rel = "<" if self.bound in ("lower_proportion", "linear_floor") else ">"
        return f"{self.bound}: bet {self.bet!r} {rel} limit {self.limit!r}"


def validate_bet(
    state: SystemState, bet: Amount, constraints: BetConstraints
) -> BetViolation | None:
    """Check a bet against proportion bounds and the optional linear floor."""
    if state.terminated:
        raise AlreadyTerminatedError("cannot validate a bet on a terminated system")
    lo = state.target * constraints.lower(state.length)
    hi = state.target * constraints.upper(state.length)
    if bet < lo:
        return BetViolation("lower_proportion", bet, lo)
    if bet > hi:
        return BetViolation("upper_proportion", bet, hi)
    if constraints.linear_floor is not None:
        c1, c2 = constraints.linear_floor
        floor = c1 * state.length + c2
        if bet < floor:
            return BetViolation("linear_floor", bet, floor)
    return None


def is_good_list(entries: Sequence[Amount]) -> bool:
    """A good list is positive, non-decreasing, with non-decreasing consecutive
    differences all bounded by the first entry.  Empty and singleton lists are
    good whenever their entries are positive."""
    n = len(entries)
    if n == 0:
        return True
    first = entries[0]
    if not first > 0:
        return False
    prev = first
    prev_diff = None
    for x in entries[1:]:
        if not x > 0:
            return False
        diff = x - prev
        if diff < 0:
            return False
        if prev_diff is not None and diff < prev_diff:
            return False
        if diff > first:
            return False
        prev = x
        prev_diff = diff
    return True


@dataclass(frozen=True, slots=True)
class EpisodeRecord:
    """Outcome summary of one episode.

    ``censored`` marks episodes stopped by the coup cutoff; their maxima and
    sums are lower bounds for the uncensored quantities.
    """

    n_coups: int
    b_star: Amount
    t_star: Amount
    sum_bets: Amount
    wins: int
    losses: int
    censored: bool
    final_target: Amount
    seed: int


PolicyFn = Callable[[Amount, int], Amount]


def constant_proportion_policy(c: float) -> PolicyFn:
    """Policy betting the fixed proportion c of the current target (length >= 3)."""
    if not 0 <= c <= 1:
        raise InvalidConfigError(f"proportion must be in [0, 1], got {c}", key="system")

    def policy(target: Amount, length: int) -> Amount:
        return c * target

    return policy


def _labouchere_episode(entries, draw_win, cutoff, seed):
    lst = list(entries)
    head = 0
    target = sum(lst)
    t_star = target
    b_star = 0 * target
    total = 0 * target
    wins = 0
    n = 0
    while n < cutoff:
        size = len(lst) - head
        if size == 0:
            break
        first = lst[head]
        bet = first if size == 1 else first + lst[-1]
        n += 1
        total += bet
        if bet > b_star:
            b_star = bet
        if draw_win():
            wins += 1
            target -= bet
            head += 1
            if size > 1:
                lst.pop()
        else:
            target += bet
            if target > t_star:
                t_star = target
            lst.append(bet)
    censored = len(lst) - head > 0
    final = target if censored else 0 * target
    return EpisodeRecord(n, b_star, t_star, total, wins, n - wins, censored, final, seed)


def _fibonacci_episode(entries, draw_win, cutoff, seed):
    lst = list(entries)
    target = sum(lst)
    t_star = target
    b_star = 0 * target
    total = 0 * target
    wins = 0
    n = 0
    while n < cutoff:
        size = len(lst)
        if size == 0:
            break
        bet = lst[-1] if size == 1 else lst[-2] + lst[-1]
        n += 1
        total += bet
        if bet > b_star:
            b_star = bet
        if draw_win():
            wins += 1
            target -= bet
            lst.pop()
            if size > 1:
                lst.pop()
        else:
            target += bet
            if target > t_star:
                t_star = target
            lst.append(bet)
    censored = len(lst) > 0
    final = target if censored else 0 * target
    return EpisodeRecord(n, b_star, t_star, total, wins, n - wins, censored, final, seed)


def _policy_episode(policy, target, length, draw_win, cutoff, seed):
    t_star = target
    b_star = 0 * target
    total = 0 * target
    wins = 0
    n = 0
    while n < cutoff and length > 0:
        if length <= 2:
            bet = target
        else:
            bet = policy(target, length)
            if not (0 <= bet <= target):
                raise BetOutOfRangeError(
                    f"policy bet {bet!r} outside [0, {target!r}] at length {length}"
                )
        n += 1
        total += bet
        if bet > b_star:
            b_star = bet
        if draw_win():
            wins += 1
            target = target - bet
            length = length - 2 if length > 2 else 0
        else:
            target = target + bet
            length += 1
            if target > t_star:
                t_star = target
    censored = length > 0
    final = target if censored else 0 * target
    return EpisodeRecord(n, b_star, t_star, total, wins, n - wins, censored, final, seed)


def run_episode(
    system: str | PolicyFn,
    initial: Sequence[Amount] | SystemState,
    p: float,
    rng,
    cutoff: int,
    seed: int = 0,
) -> EpisodeRecord:
    """Simulate one episode to termination or the coup cutoff.

    ``system`` is "labouchere", "fibonacci", or a policy callable
    ``(target, length) -> bet`` driving the abstract process.  ``rng`` is a
    seeded ``random.Random``-like object; wins are drawn as ``rng.random() < p``.
    The result is deterministic given the rng state.
    """
    if cutoff < 1:
        raise InvalidConfigError(f"cutoff must be >= 1, got {cutoff}", key="cutoff")
    if not 0 <= p <= 1:
        raise InvalidConfigError(f"p must be in [0, 1], got {p}", key="p")
    rand = rng.random

    def draw_win() -> bool:
        return rand() < p

    return _dispatch_episode(system, initial, draw_win, cutoff, seed)


def play(
    system: str | PolicyFn,
    initial: Sequence[Amount] | SystemState,
    outcomes: Iterable[Outcome],
    cutoff: int | None = None,
    seed: int = 0,
) -> EpisodeRecord:
    """Run an episode on a scripted outcome sequence (used for exact checks).

    The episode stops at termination, at the cutoff, or when the script is
    exhausted; in the latter case the record is censored like a cutoff stop.
    """
    it = iter(outcomes)
    exhausted = False

    def draw_win() -> bool:
        nonlocal exhausted
        try:
            return next(it) is Outcome.WIN
        except StopIteration as exc:
            exhausted = True
            raise _ScriptExhausted() from exc

    limit = cutoff if cutoff is not None else 2**62
    try:
        return _dispatch_episode(system, initial, draw_win, limit, seed)
    except _ScriptExhausted:
        raise InvalidConfigError("outcome script shorter than the episode") from None


class _ScriptExhausted(Exception):
    pass


def _dispatch_episode(system, initial, draw_win, cutoff, seed):
    if callable(system):
        if not isinstance(initial, SystemState):
            initial = SystemState(sum(initial), len(tuple(initial)))
        if initial.terminated:
            raise InvalidConfigError("initial state already terminated", key="list")
        return _policy_episode(system, initial.target, initial.length, draw_win, cutoff, seed)
    entries = check_betting_list(initial)
    if not entries:
        raise InvalidConfigError("initial list must be non-empty", key="list")
    if system == "labouchere":
        return _labouchere_episode(entries, draw_win, cutoff, seed)
    if system == "fibonacci":
        return _fibonacci_episode(entries, draw_win, cutoff, seed)
    raise InvalidConfigError(f"unknown system {system!r}", key="system")
