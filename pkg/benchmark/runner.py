"""
Runner module for the benchmark harness.
Contains the benchmark specification, the sweep over problems and variants,
success evaluation and the trace / summary / profile file writers.
"""
import csv
import json
import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from cubic_newton.config import (DEFAULT_BUDGET, DEFAULT_ELL_MAX, DEFAULT_EPS, DEFAULT_TAU0,
                                 DriverConfig, SolveOptions)
from cubic_newton.driver import first_order_cnm, zero_order_cnm
from cubic_newton.errors import EmptyInput
from cubic_newton.models import RunReport, TraceRow

from .problems import CatalogEntry, catalog, get_entry
from .profile import ProfileTable, performance_profile

# Load environment variables
load_dotenv()

# Setup logging
logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["k", "ell", "t", "sigma", "h", "f_evals", "grad_evals", "F",
                 "grad_residual", "stationarity"]
SUMMARY_COLUMNS = ["problem", "method", "m", "success", "metric", "best_F", "termination"]

_M_TOKEN = re.compile(r"^(n|2n|[1-9]\d*)$")


def resolve_m(token: str, n: int) -> int:
    """Turn an m token (``1``, ``n``, ``2n`` or an integer) into a count for dimension n."""
    token = str(token).strip().lower()
    if not _M_TOKEN.match(token):
        raise ValueError(f"invalid m '{token}': expected a positive integer, 'n' or '2n'")
    if token == "n":
        return n
    if token == "2n":
        return 2 * n
    return int(token)


class BenchmarkSpec(BaseModel):
    """One benchmark sweep: methods x m choices x problems."""
    methods: List[Literal["fo", "zo"]] = Field(default_factory=lambda: ["fo"], min_length=1)
    m_choices: List[str] = Field(default_factory=lambda: ["1", "n", "2n"], min_length=1)
    problems: List[str] = Field(default_factory=lambda: ["all"], min_length=1)
    tau0: float = Field(default=DEFAULT_TAU0, gt=0)
    eps: float = Field(default=DEFAULT_EPS, gt=0)
    budget: int = Field(default=DEFAULT_BUDGET, ge=1)
    seed: int = 0
    output_dir: str = Field(default_factory=lambda: os.getenv("CNM_OUTPUT_DIR", "./results"))
    jobs: int = Field(default_factory=lambda: os.getenv("CNM_JOBS", "1"), ge=1, validate_default=True)
    second_order: bool = False
    trace: bool = True

    @field_validator("m_choices")
    @classmethod
    def check_m_choices(cls, value: List[str]) -> List[str]:
        tokens = []
        for v in value:
            token = str(v).strip().lower()
            resolve_m(token, 1)
            if token not in tokens:
                tokens.append(token)
        return tokens

    @field_validator("methods")
    @classmethod
    def dedupe_methods(cls, value: List[str]) -> List[str]:
        return list(dict.fromkeys(value))

    @field_validator("problems")
    @classmethod
    def check_problems(cls, value: List[str]) -> List[str]:
        names = [v.strip() for v in value if v.strip()]
        if not names:
            raise ValueError("at least one problem is required")
        return names


@dataclass
class SummaryRow:
    """One line of summary.tsv."""
    problem: str
    method: str
    m: str
    success: bool
    metric: Optional[int]
    best_F: float
    termination: str

    @property
    def variant(self) -> str:
        return variant_label(self.method, self.m)


@dataclass(eq=False)
class BenchmarkResult:
    """Summary rows, one profile per method and the files that were written."""
    rows: List[SummaryRow]
    profiles: Dict[str, ProfileTable]
    reports: Dict[Tuple[str, str], RunReport]
    files: List[Path] = field(default_factory=list)


def variant_label(method: str, token: str) -> str:
    return f"{method}_m{token}"


def strict_wins(rows: List[SummaryRow], method: str) -> Dict[str, int]:
    """Per variant of one method, the number of problems where it alone has the smallest metric."""
    wins = {r.variant: 0 for r in rows if r.method == method}
    by_problem: Dict[str, List[SummaryRow]] = {}
    for row in rows:
        if row.method == method and row.metric is not None:
            by_problem.setdefault(row.problem, []).append(row)
    for finished in by_problem.values():
        best = min(r.metric for r in finished)
        leaders = [r for r in finished if r.metric == best]
        if len(leaders) == 1:
            wins[leaders[0].variant] += 1
    return wins


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def fo_success(report: RunReport, eps: float) -> Optional[TraceRow]:
    """First trace row whose stationarity reaches eps."""
    for row in report.full_trace or []:
        if row.stationarity is not None and row.stationarity <= eps:
            return row
    return None


def zo_success(report: RunReport, eps: float, f_best: float) -> Optional[TraceRow]:
    """First F-evaluated row with F - f_best <= eps (F(x0) - f_best)."""
    target = eps * (report.initial_f - f_best)
    for row in report.full_trace or []:
        if row.F is not None and row.F - f_best <= target:
            return row
    return None


class BenchmarkRunner:
    """Runs a BenchmarkSpec and writes its artifacts."""

    def __init__(self, spec: BenchmarkSpec):
        self.spec = spec
        self.entries = self._select_entries()
        self.out = Path(spec.output_dir)

    def _select_entries(self) -> List[CatalogEntry]:
        if any(name.lower() == "all" for name in self.spec.problems):
            return catalog()
        entries: Dict[str, CatalogEntry] = {}
        for name in self.spec.problems:
            entry = get_entry(name, self.spec.seed)
            entries.setdefault(entry.name, entry)
        return list(entries.values())

    def _config(self, method: str, token: str, n: int) -> DriverConfig:
        spec = self.spec
        return DriverConfig(tau0=spec.tau0, eps=spec.eps, m=resolve_m(token, n), budget=spec.budget,
                            second_order=spec.second_order, record_trace=True,
                            trace_stop=method == "fo")

    def _run_one(self, task: Tuple[CatalogEntry, str, str]) -> RunReport:
        entry, method, token = task
        cfg = self._config(method, token, entry.dim)
        solver = first_order_cnm if method == "fo" else zero_order_cnm
        return solver(entry.build(), entry.start, cfg)

    def run(self) -> BenchmarkResult:
        spec = self.spec
        tasks = [(entry, method, token) for entry in self.entries
                 for method in spec.methods for token in spec.m_choices]
        logger.info(f"📊 benchmark: {len(self.entries)} problems x {len(spec.methods) * len(spec.m_choices)} "
                    f"variants, jobs={spec.jobs}")
        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            reports = list(pool.map(self._run_one, tasks))

        by_key: Dict[Tuple[str, str], RunReport] = {}
        for (entry, method, token), report in zip(tasks, reports):
            by_key[(entry.name, variant_label(method, token))] = report

        rows = self._evaluate(tasks, by_key)
        profiles = self._profiles(rows)
        result = BenchmarkResult(rows=rows, profiles=profiles, reports=by_key)
        result.files = self._write(result)
        logger.info(f"✅ benchmark finished: {sum(r.success for r in rows)}/{len(rows)} runs succeeded, "
                    f"{len(result.files)} files written to {self.out}")
        for method in spec.methods:
            logger.info(f"📊 {method.upper()} strict wins: {strict_wins(rows, method)}")
        return result

    def _evaluate(self, tasks, by_key) -> List[SummaryRow]:
        eps = self.spec.eps
        f_best: Dict[str, float] = {}
        for entry, method, token in tasks:
            if method == "zo":
                best = by_key[(entry.name, variant_label(method, token))].best_f
                f_best[entry.name] = min(f_best.get(entry.name, np.inf), best)

        rows = []
        for entry, method, token in tasks:
            report = by_key[(entry.name, variant_label(method, token))]
            if method == "fo":
                hit = fo_success(report, eps)
                metric = hit.f_evals + hit.grad_evals if hit is not None else None
            else:
                hit = zo_success(report, eps, f_best[entry.name])
                metric = hit.f_evals if hit is not None else None
            rows.append(SummaryRow(problem=entry.name, method=method, m=token,
                                   success=hit is not None, metric=metric,
                                   best_F=report.best_f, termination=report.termination.value))
        rows.sort(key=lambda r: (r.problem, r.variant))
        return rows

    def _profiles(self, rows: List[SummaryRow]) -> Dict[str, ProfileTable]:
        profiles = {}
        for method in self.spec.methods:
            counts = {(r.problem, r.variant): r.metric for r in rows if r.method == method}
            try:
                profiles[method] = performance_profile(counts)
            except EmptyInput as e:
                logger.warning(f"⚠️ no {method.upper()} profile: {e}")
        return profiles

    def _write(self, result: BenchmarkResult) -> List[Path]:
        self.out.mkdir(parents=True, exist_ok=True)
        written = []
        if self.spec.trace:
            trace_dir = self.out / "traces"
            trace_dir.mkdir(exist_ok=True)
            for key in sorted(result.reports):
                path = trace_dir / f"{key[0]}__{key[1]}.csv"
                write_trace(path, result.reports[key])
                written.append(path)

        path = self.out / "summary.tsv"
        write_summary(path, result.rows)
        written.append(path)

        for method, table in sorted(result.profiles.items()):
            path = self.out / f"profile_{method}.tsv"
            write_profile(path, table)
            written.append(path)

        path = self.out / "config.json"
        self._write_config(path)
        written.append(path)
        for path in written:
            logger.debug(f"wrote {path}")
        return written

    def _write_config(self, path: Path):
        payload = {
            "spec": self.spec.model_dump(mode="json"),
            "solver": SolveOptions().model_dump(mode="json"),
            "ell_max": DEFAULT_ELL_MAX,
            "zo_trace_stop": False,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_trace(path: Path, report: RunReport):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in report.full_trace or []:
            writer.writerow([_fmt(getattr(row, column)) for column in TRACE_COLUMNS])


def write_summary(path: Path, rows: List[SummaryRow]):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([row.problem, row.method, row.m, _fmt(row.success), _fmt(row.metric),
                             _fmt(row.best_F), row.termination])


def write_profile(path: Path, table: ProfileTable):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(["x"] + [f"curve_{v}" for v in table.variants])
        for i, x in enumerate(table.grid):
            writer.writerow([f"{x:.2f}"] + [_fmt(table.curve[v][i]) for v in table.variants])
        handle.write(f"# excluded_problems\t{len(table.excluded)}\n")


def run_benchmark(spec: BenchmarkSpec) -> BenchmarkResult:
    """Run every (problem, method, m) combination of the sweep and write the artifacts."""
    return BenchmarkRunner(spec).run()
