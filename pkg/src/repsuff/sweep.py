"""Partition sweeps and their CSV rendering."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .mdp import TabularMDP
from .representation import BlockPartition, enumerate_partitions
from .sufficiency import TIE_EPS, Q_TOL, SweepContext

THREADS_ENV = "REPSUFF_THREADS"
OBJECTIVE_COLUMNS = {"fwd": "J_fwd", "state": "J_state", "inv": "J_inv", "inv+r": "J_inv_plus_R"}
VALUE_COLUMNS = ["partition_id", "blocks", "I_ZS", "J_fwd", "J_state", "J_inv", "J_inv_plus_R",
                 "pi_sufficient", "q_sufficient", "normalized_return"]


@dataclass(frozen=True)
class SweepRow:
    partition_id: int
    partition: BlockPartition
    blocks: str
    values: dict[str, float]
    pi_sufficient: bool
    q_sufficient: bool
    normalized_return: float
    maximizes: dict[str, bool]

    @property
    def I_ZS(self) -> float:
        return self.values["I_ZS"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def sweep(mdp: TabularMDP, policy: np.ndarray | None = None, start: np.ndarray | None = None,
          k: int = 1, eps: float = TIE_EPS, tol: float = Q_TOL) -> list[SweepRow]:
    """Evaluate every block partition; rows ordered by I(Z;S), then partition id."""
    ctx = SweepContext(mdp, policy, start, k)
    ctx.q  # computed once, before any worker threads start
    partitions = list(enumerate_partitions(mdp.n_states))

    def evaluate(p: BlockPartition):
        return p, ctx.objectives(p), ctx.verdict(p, tol), ctx.aliased_return(p).normalized

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(evaluate, partitions))
    else:
        results = [evaluate(p) for p in partitions]

    best = {o: max(r[1][o] for r in results) for o in OBJECTIVE_COLUMNS}
    rows = [
        SweepRow(p.index, p, p.literal(mdp.state_names), values, verdict.pi_sufficient,
                 verdict.q_sufficient, ret,
                 {o: values[o] >= best[o] - eps for o in OBJECTIVE_COLUMNS})
        for p, values, verdict, ret in results
    ]
    rows.sort(key=lambda r: (round(r.I_ZS, 12), r.partition_id))
    return rows


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    text = f"{x:.12g}"
    return "0" if text == "-0" else text


def flag_columns(objective: str = "all") -> list[str]:
    chosen = list(OBJECTIVE_COLUMNS) if objective == "all" else [objective]
    return ["max_" + OBJECTIVE_COLUMNS[o][2:] for o in chosen]


def rows_to_csv(rows: list[SweepRow], objective: str = "all") -> str:
    """Deterministic CSV: fixed columns, 12 significant digits, LF line endings."""
    if objective != "all" and objective not in OBJECTIVE_COLUMNS:
        raise ValueError(f"unknown objective {objective!r}")
    chosen = list(OBJECTIVE_COLUMNS) if objective == "all" else [objective]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(VALUE_COLUMNS + flag_columns(objective))
    for r in rows:
        writer.writerow([_fmt(x) for x in (
            r.partition_id, r.blocks, r.values["I_ZS"], r.values["fwd"], r.values["state"],
            r.values["inv"], r.values["inv+r"], r.pi_sufficient, r.q_sufficient,
            r.normalized_return, *(r.maximizes[o] for o in chosen))])
    return buf.getvalue()
