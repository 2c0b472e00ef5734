"""Guess how an uploaded spreadsheet's columns map onto known fields."""

from __future__ import annotations

from typing import Sequence

MAX_DISTANCE = 3
CANONICAL_FIELDS = ("investor name", "first name", "last name", "email", "firm", "stage", "notes",
                    "last contacted")


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert, delete and substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def guess_column_mapping(headers: Sequence[str], canonical: Sequence[str] = CANONICAL_FIELDS,
                         max_distance: int = MAX_DISTANCE) -> dict[int, str]:
    """Map header index to canonical field name.

    Comparison ignores case and surrounding whitespace. Candidate pairs
    within ``max_distance`` are accepted greedily from the closest, so each
    header and each field is used at most once.
    """
    if not headers:
        raise ValueError("headers must be non-empty")
    pairs = []
    for hi, header in enumerate(headers):
        h = header.strip().lower()
        for ci, field in enumerate(canonical):
            d = levenshtein(h, field.strip().lower())
            if d <= max_distance:
                pairs.append((d, hi, ci))
    pairs.sort()
    mapping: dict[int, str] = {}
    used: set[int] = set()
    for _, hi, ci in pairs:
        if hi in mapping or ci in used:
            continue
        mapping[hi] = canonical[ci]
        used.add(ci)
    return dict(sorted(mapping.items()))
