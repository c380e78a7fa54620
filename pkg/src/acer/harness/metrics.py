"""Episode records, trailing hit rates and the TP/CT/SC/CR run summary."""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

EPISODE_COLUMNS = ("episode", "steps", "return", "outcome", "hit_rate", "c", "beta", "learn_calls")
CSV_SCHEMA_VERSION = 1
CONVERGENCE_THRESHOLD = 0.70


@dataclass
class EpisodeRecord:
    episode: int
    steps: int
    ret: float
    outcome: str
    hit_rate: float
    c: float
    beta: float
    learn_calls: int
    wall_ms: float = 0.0

    def row(self) -> list:
        return [self.episode, self.steps, repr(float(self.ret)), self.outcome,
                repr(float(self.hit_rate)), repr(float(self.c)), repr(float(self.beta)),
                self.learn_calls]


@dataclass
class RunSummary:
    TP: float
    CT: int | None
    SC: float | None
    CR: float | None
    episodes: int

    def as_dict(self) -> dict:
        return asdict(self)


def trailing_hit_rates(successes: Sequence[bool], window: int = 500) -> np.ndarray:
    """Success fraction over the last ``window`` episodes (fewer at the start)."""
    s = np.asarray(successes, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(s)])
    idx = np.arange(1, s.size + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


def summarize(records: Iterable, stat_window: int = 1500) -> RunSummary:
    """TP = peak hit rate; CT = first episode at >= 70 %; SC/CR = std/mean of the last ``stat_window``.

    ``records`` are EpisodeRecords or plain hit-rate values (episode = 1-based position).
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    if isinstance(records[0], EpisodeRecord):
        h = np.array([r.hit_rate for r in records], dtype=np.float64)
        eps = [r.episode for r in records]
    else:
        h = np.asarray(records, dtype=np.float64)
        eps = list(range(1, h.size + 1))
    hit = np.flatnonzero(h >= CONVERGENCE_THRESHOLD)
    ct = int(eps[hit[0]]) if hit.size else None
    if h.size >= stat_window:
        tail = h[-stat_window:]
        sc, cr = float(np.std(tail)), float(np.mean(tail))
    else:
        sc = cr = None
    return RunSummary(float(h.max()), ct, sc, cr, int(h.size))


def write_episodes_csv(path, records: Sequence[EpisodeRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# acer-episodes v{CSV_SCHEMA_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(EPISODE_COLUMNS)
        for r in records:
            w.writerow(r.row())


def read_episodes_csv(path) -> list[EpisodeRecord]:
    out = []
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    for row in reader:
        out.append(EpisodeRecord(int(row["episode"]), int(row["steps"]), float(row["return"]),
                                 row["outcome"], float(row["hit_rate"]), float(row["c"]),
                                 float(row["beta"]), int(row["learn_calls"])))
    return out

