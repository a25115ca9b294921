"""Timing harness: one instruction inserted mid-file, full vs incremental.

Measures the engine cost of typing "addi x1, x2, -121" into a fresh empty
line in the middle of synthetic programs of varying size.  Absolute times
are hardware-bound; the interesting outputs are the linear fit of the full
mode, the flatness of the incremental mode, and the ratio between them.
Runs are single-threaded over a monotonic clock, median of `repeats` with
warmup discards; document string manipulation stays outside the timer.
"""

from __future__ import annotations

import gc
import random
import statistics
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from .assembler import assemble_full
from .incremental import (
    Document,
    InsertNewline,
    apply_edit,
    insert_empty_entry,
    insert_instruction_word,
    reassemble_line,
)
from .model import OpCounters

INSERTED_TEXT = "addi x1, x2, -121"
DEFAULT_SIZES = (1, 10, 100, 1000, 2000, 3000, 4000, 5000,
                 6000, 7000, 8000, 9000, 10000)
DEFAULT_REPEATS = 31
WARMUP = 3

_BODY = ("addi x5, x5, 1", "add x6, x5, x5", "xor x7, x6, x5",
         "sub x8, x7, x6", "and x9, x8, x7", "or x10, x9, x8",
         "slli x11, x10, 1", "srli x12, x11, 1", "mul x13, x12, x11",
         "sltu x14, x13, x12")

LABEL_STRIDE = 50


@dataclass
class BenchRow:
    lines: int
    full_us: float                  # per-insertion total (17 keystrokes)
    incremental_us: float           # per-insertion total (17 keystrokes)
    full_us_per_keystroke: float
    incr_us_per_keystroke: float
    counters: dict[str, dict[str, int]] = field(default_factory=dict)


@dataclass
class FitSummary:
    full_c1: float                  # microseconds per line
    full_c2: float                  # microseconds constant term
    full_r2: float
    incremental_slope: float
    degenerate: bool = False


def generate_program(n: int, seed: int = 2024) -> str:
    """Deterministic n-line program: arithmetic body with a label and a
    backward branch to it every LABEL_STRIDE lines, so the symbol table and
    reference lists grow with n."""
    if n < 1:
        raise ValueError("program needs at least one line")
    rng = random.Random(seed)
    lines = []
    for i in range(n):
        block, position = divmod(i, LABEL_STRIDE)
        if position == 1:
            lines.append(f"block{block}:")
        elif position == LABEL_STRIDE - 1:
            lines.append(f"bne x5, x6, block{block}")
        else:
            lines.append(rng.choice(_BODY))
    return "\n".join(lines)


@contextmanager
def _quiesced_gc():
    """Collector paused around a timed region; medians stay medians."""
    was_enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def _median_time(fn, repeats: int) -> float:
    """Median wall time of fn() in microseconds, after warmup."""
    times = []
    for i in range(repeats + WARMUP):
        with _quiesced_gc():
            start = time.perf_counter_ns()
            fn()
            elapsed = time.perf_counter_ns() - start
        if i >= WARMUP:
            times.append(elapsed / 1000.0)
    return statistics.median(times)


def _keystroke_lines(insert_at_line: int) -> list[str]:
    """The successive line contents while typing the instruction."""
    return [INSERTED_TEXT[:i + 1] for i in range(len(INSERTED_TEXT))]


def time_insertion(n: int, mode: str, repeats: int = DEFAULT_REPEATS,
                   seed: int = 2024) -> tuple[float, float, dict[str, int]]:
    """(per-insertion µs, per-keystroke µs, counters) for one program size.

    Full mode times one whole-program reassembly of the final text (the
    per-keystroke cost of that mode); the insertion total is that cost times
    the 17 keystrokes.  Incremental mode times the word-insertion event plus
    the 16 single-line reassemblies that complete the instruction.
    """
    source = generate_program(n, seed)
    middle = n // 2
    keystrokes = _keystroke_lines(middle)

    if mode == "full":
        doc = Document(source)
        doc.apply(InsertNewline(middle, 0))
        for i, ch in enumerate(INSERTED_TEXT):
            doc.lines[middle] = keystrokes[i]
        final_text = doc.text()
        counters = OpCounters()
        assemble_full(final_text, counters)  # warm, and counter snapshot
        snapshot = counters.snapshot()
        per_keystroke = _median_time(lambda: assemble_full(final_text),
                                     repeats)
        return per_keystroke * len(INSERTED_TEXT), per_keystroke, snapshot

    # Counter snapshot for a single insertion event at this size.
    state = assemble_full(source)
    insert_empty_entry(state, middle)
    before = state.counters.snapshot()
    insert_instruction_word(state, middle, keystrokes[0])
    after = state.counters.snapshot()
    snapshot = {key: after[key] - before[key] for key in after}

    # Each repetition inserts a fresh empty line mid-file (untimed) and
    # times the keystrokes that fill it.  The state is rebuilt whenever the
    # accumulated insertions would distort the program size.
    times = []
    state = None
    inserted = 0
    rebuild_every = max(1, n // 20)
    for rep in range(repeats + WARMUP):
        if state is None or inserted >= rebuild_every:
            state = assemble_full(source)
            inserted = 0
        insert_empty_entry(state, middle)
        inserted += 1
        with _quiesced_gc():
            start = time.perf_counter_ns()
            insert_instruction_word(state, middle, keystrokes[0])
            for text in keystrokes[1:]:
                reassemble_line(state, middle, text)
            elapsed = time.perf_counter_ns() - start
        if rep >= WARMUP:
            times.append(elapsed / 1000.0)
    total = statistics.median(times)
    return total, total / len(INSERTED_TEXT), snapshot


def linear_fit(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """Least-squares (slope, intercept, r_squared)."""
    if len(xs) < 2 or len(set(xs)) < 2:
        return 0.0, ys[0] if ys else 0.0, 0.0
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_total = sum((y - mean) ** 2 for y in ys)
    ss_resid = sum((y - (slope * x + intercept)) ** 2
                   for x, y in zip(xs, ys))
    r2 = 1.0 - ss_resid / ss_total if ss_total else 1.0
    return slope, intercept, r2


def run_benchmark(sizes: tuple[int, ...] = DEFAULT_SIZES,
                  repeats: int = DEFAULT_REPEATS,
                  with_counters: bool = True,
                  progress=None) -> tuple[list[BenchRow], FitSummary]:
    rows = []
    for n in sizes:
        full_total, full_per_key, full_counters = \
            time_insertion(n, "full", repeats)
        incr_total, incr_per_key, incr_counters = \
            time_insertion(n, "incremental", repeats)
        row = BenchRow(n, full_total, incr_total, full_per_key, incr_per_key,
                       {"full": full_counters, "incremental": incr_counters}
                       if with_counters else {})
        rows.append(row)
        if progress is not None:
            progress(row)
    xs = [float(r.lines) for r in rows]
    full_slope, full_intercept, full_r2 = linear_fit(
        xs, [r.full_us_per_keystroke for r in rows])
    incr_slope, _, _ = linear_fit(xs, [r.incremental_us for r in rows])
    fit = FitSummary(full_slope, full_intercept, full_r2, incr_slope,
                     degenerate=len(set(xs)) < 2)
    return rows, fit


CSV_HEADER = "lines,full_us,incremental_us,full_us_per_keystroke,incr_us_per_keystroke"


def rows_to_csv(rows: list[BenchRow]) -> str:
    # Engine time only; document string manipulation is excluded by design.
    out = ["# median engine time, microseconds; editor overhead excluded",
           CSV_HEADER]
    for r in rows:
        out.append(f"{r.lines},{r.full_us:.1f},{r.incremental_us:.1f},"
                   f"{r.full_us_per_keystroke:.1f},{r.incr_us_per_keystroke:.1f}")
    return "\n".join(out) + "\n"
