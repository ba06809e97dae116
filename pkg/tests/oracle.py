"""Independent brute-force tally oracles.

These recompute outcomes from plain (participant, value, weight) triples
with their own arithmetic (explicit share division, integer counting) and
never touch the engine's tally code, so they can referee it.
"""
from __future__ import annotations

from fractions import Fraction


def oracle_majority_boolean(votes: list[tuple[str, bool, Fraction]], ratio: Fraction) -> str:
    """Expected outcome ("accept"/"reject") of a weighted boolean majority."""
    accept = Fraction(0)
    total = Fraction(0)
    for _pid, value, weight in votes:
        total += weight
        if value:
            accept += weight
    if total == 0:
        return "reject"
    return "accept" if accept / total >= ratio else "reject"


def oracle_majority_candidate(
    votes: list[tuple[str, str, Fraction]],
    ratio: Fraction,
    candidates: tuple[str, ...],
) -> tuple[str, str | None, bool]:
    """Expected (outcome, winner, tie) of a weighted candidate-choice majority."""
    weights = {c: Fraction(0) for c in candidates}
    total = Fraction(0)
    for _pid, choice, weight in votes:
        weights[choice] += weight
        total += weight
    if total == 0:
        return "no-winner", None, False
    best = max(weights.values())
    leaders = [c for c in candidates if weights[c] == best]
    if len(leaders) > 1:
        return "no-winner", None, True
    if weights[leaders[0]] / total >= ratio:
        return "winner", leaders[0], False
    return "no-winner", None, False


def oracle_counting_majority(votes: list[tuple[str, bool, Fraction]]) -> str:
    """Unweighted simple majority by integer counting (weights all 1,
    threshold one half): accept iff count(accept) >= count(cast) / 2."""
    cast = len(votes)
    if cast == 0:
        return "reject"
    accepts = sum(1 for _pid, value, _w in votes if value)
    return "accept" if 2 * accepts >= cast else "reject"


def oracle_lazy_consensus(votes: list[tuple[str, bool, Fraction]]) -> str:
    return "reject" if any(value is False for _pid, value, _w in votes) else "accept"


def oracle_leader(
    votes: list[tuple[str, bool, Fraction]], leader: str, fallback_ratio: Fraction | None
) -> str:
    """Leader's vote decides; else optional majority fallback; else reject."""
    for pid, value, _w in votes:
        if pid == leader:
            return "accept" if value else "reject"
    if fallback_ratio is not None:
        return oracle_majority_boolean(votes, fallback_ratio)
    return "reject"
