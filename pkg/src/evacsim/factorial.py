"""2^k factorial screening: sign tables, effect estimation, variation split.

The design evaluates k factors at two levels over all 2^k combinations.
Effect coefficients come from the orthogonal sign table; the share of
variation attributed to each effect is its squared coefficient over the
sum of all squared effect coefficients, grand mean excluded.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from typing import Sequence

MAX_FACTORS = 10


@dataclass(frozen=True, slots=True)
class Factor:
    id: str
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not self.id or len(self.id) != 1 or self.id not in string.ascii_uppercase:
            raise ValueError(f"factor id must be a single letter A-Z, got {self.id!r}")
        if not self.low < self.high:
            raise ValueError(f"factor {self.id}: low must be < high")


@dataclass(frozen=True, slots=True)
class DesignMatrix:
    """Yates-order sign matrix: row 0 is all -1, column j flips in blocks of 2^j."""

    k: int
    ids: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]

    def effect_labels(self) -> list[str]:
        """Single factors then interactions, shortest first: A, B, AB, C, AC..."""
        labels = []
        for r in range(1, self.k + 1):
            for combo in itertools.combinations(range(self.k), r):
                labels.append("".join(self.ids[j] for j in combo))
        return labels

    def column(self, label: str) -> list[int]:
        """Signed column of a main effect or interaction (product of members)."""
        idx = [self.ids.index(ch) for ch in label]
        col = []
        for row in self.rows:
            sign = 1
            for j in idx:
                sign *= row[j]
            col.append(sign)
        return col


def sign_table(k: int, ids: Sequence[str] | None = None) -> DesignMatrix:
    if not 1 <= k <= MAX_FACTORS:
        raise ValueError(f"factor count must be in 1..{MAX_FACTORS}, got {k}")
    if ids is None:
        ids = tuple(string.ascii_uppercase[:k])
    else:
        ids = tuple(ids)
        if len(ids) != k or len(set(ids)) != k:
            raise ValueError("need k distinct factor ids")
    rows = tuple(
        tuple(1 if (i >> j) & 1 else -1 for j in range(k)) for i in range(2**k)
    )
    return DesignMatrix(k=k, ids=ids, rows=rows)


def effects(design: DesignMatrix, responses: Sequence[float]) -> dict[str, float]:
    """Effect coefficients q_e = (1/2^k) * sum(sign_e * y), plus the mean."""
    n = 2**design.k
    if len(responses) != n:
        raise ValueError(f"expected {n} responses for k={design.k}, got {len(responses)}")
    out = {"mean": sum(responses) / n}
    for label in design.effect_labels():
        col = design.column(label)
        out[label] = sum(s * y for s, y in zip(col, responses)) / n
    return out


def allocation_of_variation(effect_map: dict[str, float]) -> dict[str, float]:
    """Impact percentage per effect: q_e^2 over the sum of squares, mean excluded."""
    squares = {label: q * q for label, q in effect_map.items() if label != "mean"}
    total = sum(squares.values())
    if total == 0.0:
        raise ValueError("all effects are zero: variation is undefined for a flat response")
    return {label: 100.0 * sq / total for label, sq in squares.items()}


def variation_report(
    design: DesignMatrix, responses: Sequence[float]
) -> list[tuple[str, float, float]]:
    """(effect, coefficient, impact %) rows, largest impact first."""
    effect_map = effects(design, responses)
    impacts = allocation_of_variation(effect_map)
    rows = [(label, effect_map[label], impacts[label]) for label in impacts]
    rows.sort(key=lambda r: (-r[2], r[0]))
    return rows


def render_report(
    factors: Sequence[Factor], design: DesignMatrix, responses: Sequence[float]
) -> str:
    effect_map = effects(design, responses)
    rows = variation_report(design, responses)
    lines = [f"2^{design.k} factorial, {2**design.k} responses"]
    for f in factors:
        lines.append(f"  {f.id}: {f.name} (low={f.low:g}, high={f.high:g})")
    lines.append(f"  mean response: {effect_map['mean']:.6g}")
    lines.append("")
    lines.append(f"{'effect':<8} {'coefficient':>14} {'impact %':>9}")
    for label, coeff, impact in rows:
        lines.append(f"{label:<8} {coeff:>14.6g} {impact:>9.2f}")
    lines.append(f"{'total':<8} {'':>14} {sum(i for _, _, i in rows):>9.2f}")
    return "\n".join(lines)
