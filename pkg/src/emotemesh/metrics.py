"""Recognition quality from rating studies.

Raters view an expression and score how strongly they perceive each label
of a fixed vocabulary. An expression communicates well when the intended
label soaks up most of the total perceived intensity, which is what the
quality coefficient measures: target / (average * n) is the target label's
share of the summed ratings, 1.0 when raters put everything on the intended
label and 1/n at uniform confusion.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Rating:
    subject: str
    shown: str
    rated: str
    rating: float


@dataclass(frozen=True)
class RatingMatrix:
    """All ratings of one study, with the rated-label vocabulary."""

    rows: tuple[Rating, ...]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if not 0.0 <= row.rating <= 1.0:
                raise ValidationError(
                    f"rating {row.rating} for ({row.subject}, {row.shown}, {row.rated}) outside [0, 1]"
                )
            key = (row.subject, row.shown, row.rated)
            if key in seen:
                raise ValidationError(f"duplicate rating for {key}")
            seen.add(key)

    def rated_labels(self) -> tuple[str, ...]:
        return tuple(sorted({row.rated for row in self.rows}))

    def shown_labels(self) -> tuple[str, ...]:
        return tuple(sorted({row.shown for row in self.rows}))


@dataclass(frozen=True)
class ExpressionProfile:
    """How one shown expression was perceived, aggregated over subjects."""

    shown: str
    mean_intensity: float
    target_intensity: float
    quality: float


def recognition_quality(target: float, average: float, n: int) -> float:
    """target / (average * n): the target label's share of total perceived
    intensity. Bounded by [0, 1] whenever the target is one of the n
    averaged labels."""
    if n < 1:
        raise ValueError("label count must be at least 1")
    if not average > 0:
        raise ValueError("average intensity must be positive")
    return target / (average * n)


def analyze(matrix: RatingMatrix) -> dict[str, ExpressionProfile]:
    """Profile every shown label: subject means first, then across subjects.

    target_intensity averages each subject's rating of the shown label
    itself; subjects who skipped that rating contribute to the mean but not
    the target.
    """
    if not matrix.rows:
        raise ValidationError("rating matrix is empty")
    vocabulary = set(matrix.rated_labels())
    n = len(vocabulary)

    by_shown: dict[str, dict[str, list[Rating]]] = {}
    for row in matrix.rows:
        by_shown.setdefault(row.shown, {}).setdefault(row.subject, []).append(row)

    profiles: dict[str, ExpressionProfile] = {}
    for shown in sorted(by_shown):
        if shown not in vocabulary:
            raise ValidationError(f"shown label {shown!r} is not among the rated labels")
        subject_means = []
        target_ratings = []
        for rows in by_shown[shown].values():
            subject_means.append(sum(r.rating for r in rows) / len(rows))
            own = [r.rating for r in rows if r.rated == shown]
            if own:
                target_ratings.append(own[0])
        if not target_ratings:
            raise ValidationError(f"no subject rated {shown!r} on its own label")
        mean_intensity = sum(subject_means) / len(subject_means)
        target_intensity = sum(target_ratings) / len(target_ratings)
        profiles[shown] = ExpressionProfile(
            shown=shown,
            mean_intensity=mean_intensity,
            target_intensity=target_intensity,
            quality=recognition_quality(target_intensity, mean_intensity, n),
        )
    return profiles


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

LIKERT_MAX = 4  # 5-point scale scored 0..4, normalized by /4


def load_ratings(text: str, likert: bool = False) -> RatingMatrix:
    """Parse subject,shown,rated,rating rows.

    With likert=True ratings are integers 0..4 and are divided by 4;
    otherwise they must already be normalized to [0, 1].
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("rating CSV is empty") from None
    expected = ["subject", "shown", "rated", "rating"]
    if [h.strip().lower() for h in header] != expected:
        raise ParseError(f"expected header {','.join(expected)}, got {','.join(header)}", 1)

    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != 4:
            raise ParseError(f"expected 4 fields, got {len(record)}", lineno)
        subject, shown, rated, raw = (cell.strip() for cell in record)
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(f"rating {raw!r} is not a number", lineno) from None
        if likert:
            if value != int(value) or not 0 <= value <= LIKERT_MAX:
                raise ParseError(f"Likert rating must be an integer 0..{LIKERT_MAX}, got {raw}", lineno)
            value = value / LIKERT_MAX
        elif not 0.0 <= value <= 1.0:
            raise ParseError(f"normalized rating must be in [0, 1], got {raw}", lineno)
        rows.append(Rating(subject, shown, rated, value))
    return RatingMatrix(tuple(rows))


def report(profiles: dict[str, ExpressionProfile]) -> str:
    """Fixed-width summary table, one row per shown label."""
    lines = [f"{'label':<14} {'average':>8} {'target':>8} {'quality':>8}"]
    for shown in sorted(profiles):
        p = profiles[shown]
        lines.append(f"{p.shown:<14} {p.mean_intensity:>8.3f} {p.target_intensity:>8.3f} {p.quality:>8.3f}")
    return "\n".join(lines) + "\n"
