"""Session analytics computed from the event log alone."""

from __future__ import annotations

from typing import Iterable, Sequence

from .alignment import levenshtein_distance
from .events import EventKind, SessionEvent
from .verify import VerificationRecord


def edit_distance_series(events: Sequence[SessionEvent], period_s: float = 5.0) -> list[tuple[float, int]]:
    """Character edit distance from the initial template, sampled over time.

    One sample per period from session start through the last event, each
    measuring the draft as of that instant against the template the document
    was created from.
    """
    template: str | None = None
    content = ""
    timeline: list[tuple[int, str]] = []
    for event in events:
        if event.kind is EventKind.SNAPSHOT and template is None:
            template = event.payload["content"]
            content = template
            timeline.append((event.at_us, content))
        elif event.kind is EventKind.MANUAL_EDIT or event.kind is EventKind.ACCEPTED:
            p = event.payload
            content = content[: p["start"]] + p["replacement"] + content[p["end"] :]
            timeline.append((event.at_us, content))
    if template is None:
        return []
    start_us = timeline[0][0]
    end_us = events[-1].at_us
    period_us = int(period_s * 1_000_000)
    samples: list[tuple[float, int]] = []
    cursor = 0
    current = template
    k = 0
    while True:
        t_us = start_us + k * period_us
        while cursor < len(timeline) and timeline[cursor][0] <= t_us:
            current = timeline[cursor][1]
            cursor += 1
        samples.append((k * period_s, levenshtein_distance(template, current)))
        if t_us >= end_us:
            break
        k += 1
    return samples


def verification_stats(records: Iterable[VerificationRecord]) -> dict:
    """Aggregates over the verification process; durations come from the log."""
    records = list(records)
    initiated = [r for r in records if r.queries]
    labeled = [r for r in initiated if r.labeled_at_us is not None]
    stats: dict = {
        "initiated": len(initiated),
        "labeled": len(labeled),
        "avg_queries": None,
        "avg_visited": None,
        "avg_visited_fraction": None,
        "avg_duration_s": None,
        "under_minute_fraction": None,
    }
    if initiated:
        stats["avg_queries"] = sum(len(r.queries) for r in initiated) / len(initiated)
        stats["avg_visited"] = sum(len(r.visited) for r in initiated) / len(initiated)
        stats["avg_visited_fraction"] = sum(
            len(r.visited) / len(r.queries) for r in initiated
        ) / len(initiated)
    if labeled:
        durations = [(r.labeled_at_us - r.initiated_at_us) / 1_000_000 for r in labeled]
        stats["avg_duration_s"] = sum(durations) / len(durations)
        stats["under_minute_fraction"] = sum(1 for d in durations if d < 60.0) / len(durations)
    return stats
