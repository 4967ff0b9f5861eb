"""Monte Carlo driver for the measure-then-interfere search and its baselines.

One trial runs the whole procedure:

1. prepare the uniform X register with the flag at |0>,
2. apply Uc,
3. measure the flag; on 1 measure X, on 0 run the chosen interference
   realization on the collapsed register and, if it succeeds, measure Z.

Each trial draws from its own stream derived from ``(seed, trial_index)``,
so a report is a deterministic function of its inputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import IO, Any

import numpy as np

from .errors import InvalidTrialCount, NoSolutions, ReportWriteError, ZeroResidual
from .interference import (
    InterferenceMode,
    WitnessReport,
    ideal_interfere,
    postselected_subtract,
)
from .oracle import (
    apply_uc,
    grover_step,
    grover_success_closed_form,
    optimal_grover_iterations,
    success_probability,
)
from .predicate import (
    PredicateAst,
    compile_predicate,
    enumerate_solutions,
    evaluate,
    format_predicate,
    truth_table,
)
from .statevec import (
    RegisterLayout,
    TrialStreams,
    check_width,
    measure_all,
    measure_flag,
    trial_stream,
    uniform_superposition,
)

SCHEMA_VERSION = 1

# stream domains, so that one seed never feeds two unrelated experiments
TRIAL_DOMAIN = 0
CLASSICAL_DOMAIN = 1

JSON_KEYS = (
    "schema_version",
    "predicate",
    "k",
    "n",
    "trials",
    "seed",
    "mode",
    "empirical_p_flag1",
    "expected_p_flag1",
    "mean_oracle_calls_per_success",
    "mean_interference_attempts_per_success",
    "classical_expected_checks",
    "grover_optimal_iterations",
    "grover_success_probability",
)

CSV_COLUMNS = (
    "trial_index",
    "flag_outcome",
    "solution_found",
    "oracle_calls",
    "interference_attempts",
    "succeeded",
)


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    flag_outcome: int
    solution_found: int | None
    oracle_calls: int
    interference_attempts: int
    succeeded: bool
    # ancilla post-selection (or ideal rejection) went through; not part of the CSV schema
    interference_succeeded: bool = False


@dataclass(frozen=True)
class ExperimentReport:
    k: int
    predicate_text: str
    n: int
    trials: int
    empirical_p_flag1: float
    expected_p_flag1: float
    mode: InterferenceMode
    mean_oracle_calls_per_success: float | None
    mean_interference_attempts_per_success: float | None
    classical_expected_checks: float | None
    grover_optimal_iterations: int | None
    grover_success_probability: float | None
    seed: int
    records: tuple[TrialRecord, ...] = field(default=(), repr=False, compare=False)

    @property
    def successes(self) -> int:
        return sum(r.succeeded for r in self.records)

    @property
    def interference_attempts(self) -> int:
        return sum(r.interference_attempts for r in self.records)

    @property
    def interference_successes(self) -> int:
        return sum(r.interference_succeeded for r in self.records)

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "predicate": self.predicate_text,
            "k": self.k,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode.value,
            "empirical_p_flag1": self.empirical_p_flag1,
            "expected_p_flag1": self.expected_p_flag1,
            "mean_oracle_calls_per_success": self.mean_oracle_calls_per_success,
            "mean_interference_attempts_per_success": self.mean_interference_attempts_per_success,
            "classical_expected_checks": self.classical_expected_checks,
            "grover_optimal_iterations": self.grover_optimal_iterations,
            "grover_success_probability": self.grover_success_probability,
        }


@dataclass(frozen=True)
class ComparisonReport:
    """The algorithm under both interference modes next to both baselines."""

    ideal: ExperimentReport
    postselected: ExperimentReport
    classical_mc_mean_checks: float
    classical_mc_stderr: float
    classical_mc_runs: int
    grover_simulated_success_probability: float

    @property
    def classical_within_3sigma(self) -> bool:
        expected = self.ideal.classical_expected_checks
        return abs(self.classical_mc_mean_checks - expected) <= 3 * self.classical_mc_stderr

    @property
    def grover_simulation_agrees(self) -> bool:
        return abs(self.grover_simulated_success_probability - self.ideal.grover_success_probability) <= 1e-9

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "reports": [self.ideal.as_dict(), self.postselected.as_dict()],
            "classical_monte_carlo": {
                "runs": self.classical_mc_runs,
                "mean_checks": self.classical_mc_mean_checks,
                "stderr": self.classical_mc_stderr,
                "within_3sigma": self.classical_within_3sigma,
            },
            "grover_simulation": {
                "iterations": self.ideal.grover_optimal_iterations,
                "success_probability": self.grover_simulated_success_probability,
                "agrees_with_closed_form": self.grover_simulation_agrees,
            },
        }


def classical_expected_checks(n: int, k: int) -> float:
    """Expected probes to the first solution when probing without replacement."""
    return ((1 << k) + 1) / (n + 1)


def _mean_or_none(total: int, count: int) -> float | None:
    return total / count if count else None


def _check_trials(trials: int) -> int:
    if not isinstance(trials, (int, np.integer)) or isinstance(trials, bool) or trials < 1:
        raise InvalidTrialCount(f"trials must be a positive integer, got {trials!r}")
    return int(trials)


def run_paper_algorithm(
    ast: PredicateAst,
    k: int,
    mode: InterferenceMode,
    trials: int,
    seed: int,
    text: str | None = None,
) -> ExperimentReport:
    k = check_width(k)
    trials = _check_trials(trials)
    mode = InterferenceMode(mode)
    n = enumerate_solutions(ast, k).n

    # Steps 1 and 2 involve no randomness, so every trial starts from the same |Q>.
    q_state = apply_uc(uniform_superposition(RegisterLayout(k, has_flag=True)), ast)
    ideal_z = None
    is_solution = compile_predicate(ast)

    streams = TrialStreams(seed, TRIAL_DOMAIN)
    records = []
    for i in range(trials):
        rng = streams.at(i)
        flag = measure_flag(q_state, rng)
        if flag.observed_bit == 1:
            x = measure_all(flag.posterior, rng)
            if not is_solution(x):
                raise RuntimeError(f"flag=1 branch produced non-solution x={x}")
            records.append(TrialRecord(i, 1, x, 1, 0, True))
            continue

        x_tilde = flag.posterior
        z_state = None
        if mode is InterferenceMode.IDEAL_REJECTION:
            # the collapsed register is the same state in every flag=0 trial
            if ideal_z is None:
                try:
                    ideal_z = ideal_interfere(x_tilde, k)
                except ZeroResidual:
                    ideal_z = False
            z_state = ideal_z or None
        else:
            outcome = postselected_subtract(ast, k, x_tilde, rng)
            z_state = outcome.result if outcome.succeeded else None

        if z_state is None:
            records.append(TrialRecord(i, 0, None, 1, 1, False, False))
            continue
        z = measure_all(z_state, rng)
        found = z if is_solution(z) else None
        records.append(TrialRecord(i, 0, found, 1, 1, found is not None, True))

    flag1 = sum(r.flag_outcome for r in records)
    successes = sum(r.succeeded for r in records)
    attempts = sum(r.interference_attempts for r in records)
    interfered = sum(r.interference_succeeded for r in records)
    oracle_calls = sum(r.oracle_calls for r in records)
    return ExperimentReport(
        k=k,
        predicate_text=text if text is not None else format_predicate(ast),
        n=n,
        trials=trials,
        empirical_p_flag1=flag1 / trials,
        expected_p_flag1=n / (1 << k),
        mode=mode,
        mean_oracle_calls_per_success=_mean_or_none(oracle_calls, successes),
        mean_interference_attempts_per_success=_mean_or_none(attempts, interfered),
        classical_expected_checks=classical_expected_checks(n, k) if n else None,
        grover_optimal_iterations=optimal_grover_iterations(n, k) if n else None,
        grover_success_probability=(
            grover_success_closed_form(n, k, optimal_grover_iterations(n, k)) if n else None
        ),
        seed=seed,
        records=tuple(records),
    )


def classical_search(ast: PredicateAst, k: int, rng: np.random.Generator) -> tuple[int, int | None]:
    """Probe [0, 2**k) in random order without replacement until a solution turns up.

    Returns (checks performed, solution or None).
    """
    k = check_width(k)
    checks = 0
    for x in rng.permutation(1 << k):
        checks += 1
        if evaluate(ast, int(x)):
            return checks, int(x)
    return checks, None


def classical_monte_carlo(ast: PredicateAst, k: int, runs: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of the probes needed by random probing, over ``runs`` searches."""
    k = check_width(k)
    runs = _check_trials(runs)
    table = truth_table(ast, k)
    if not table.any():
        raise NoSolutions("classical probing never terminates with a solution when n = 0")
    size = 1 << k
    rng = trial_stream(seed, 0, CLASSICAL_DOMAIN)
    rows = max(1, (1 << 20) // size)
    checks = np.empty(runs, dtype=np.int64)
    base = np.arange(size)
    done = 0
    while done < runs:
        m = min(rows, runs - done)
        order = rng.permuted(np.tile(base, (m, 1)), axis=1)
        checks[done:done + m] = table[order].argmax(axis=1) + 1
        done += m
    std = float(checks.std(ddof=1)) if runs > 1 else 0.0
    return float(checks.mean()), std / math.sqrt(runs)


def simulate_grover(ast: PredicateAst, k: int, iterations: int) -> float:
    state = uniform_superposition(k)
    for _ in range(iterations):
        state = grover_step(state, ast)
    return success_probability(state, ast)


def run_comparison(
    ast: PredicateAst, k: int, trials: int, seed: int, text: str | None = None
) -> ComparisonReport:
    k = check_width(k)
    trials = _check_trials(trials)
    n = enumerate_solutions(ast, k).n
    if n == 0:
        raise NoSolutions("comparison needs at least one solution")
    ideal = run_paper_algorithm(ast, k, InterferenceMode.IDEAL_REJECTION, trials, seed, text)
    post = run_paper_algorithm(ast, k, InterferenceMode.POSTSELECTED_SUBTRACTION, trials, seed, text)
    mean, stderr = classical_monte_carlo(ast, k, trials, seed)
    grover = simulate_grover(ast, k, ideal.grover_optimal_iterations)
    return ComparisonReport(ideal, post, mean, stderr, trials, grover)


# -- serialization -----------------------------------------------------------


def _format_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    text = format(v, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _json(value, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_json(v, indent + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(value, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in value):
            return "[" + ", ".join(_json(v) for v in value) + "]"
        items = [pad + _json(v, indent + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(value: dict[str, Any]) -> str:
    """JSON text with floats at 17 significant digits."""
    return _json(value) + "\n"


def write_text(destination: IO[str], text: str):
    try:
        destination.write(text)
        destination.flush()
    except (OSError, ValueError) as exc:
        raise ReportWriteError(f"cannot write report: {exc}") from exc


def csv_table(header, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _format_float(v)
    return str(v)


def trials_csv(report: ExperimentReport) -> str:
    rows = (
        [
            r.trial_index,
            r.flag_outcome,
            csv_cell(r.solution_found),
            r.oracle_calls,
            r.interference_attempts,
            csv_cell(r.succeeded),
        ]
        for r in report.records
    )
    return csv_table(CSV_COLUMNS, rows)


def emit_report(report: ExperimentReport, fmt: str, destination: IO[str]) -> None:
    """Write ``report`` as a JSON summary object or as per-trial CSV rows."""
    if fmt == "json":
        text = to_json(report.as_dict())
    elif fmt == "csv":
        text = trials_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    write_text(destination, text)


def emit_comparison(report: ComparisonReport, fmt: str, destination: IO[str]) -> None:
    if fmt == "json":
        text = to_json(report.as_dict())
    elif fmt == "csv":
        rows = [[csv_cell(d[k]) for k in JSON_KEYS] for d in (report.ideal.as_dict(), report.postselected.as_dict())]
        text = csv_table(JSON_KEYS, rows)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    write_text(destination, text)


WITNESS_COLUMNS = ("k", "set_a", "set_b", "input_overlap", "output_overlap", "mismatch", "verdict")


def witness_dict(w: WitnessReport) -> dict[str, Any]:
    return {
        "k": w.k,
        "set_a": list(w.set_a.members),
        "set_b": list(w.set_b.members),
        "input_overlap": w.input_overlap,
        "output_overlap": w.output_overlap,
        "mismatch": w.mismatch,
        "verdict": w.verdict,
    }


def emit_witnesses(k: int, reports: list[WitnessReport], fmt: str, destination: IO[str]) -> None:
    if fmt == "json":
        text = to_json({
            "schema_version": SCHEMA_VERSION,
            "k": k,
            "pairs": len(reports),
            "all_verdicts_true": all(w.verdict for w in reports),
            "reports": [witness_dict(w) for w in reports],
        })
    elif fmt == "csv":
        rows = []
        for w in reports:
            d = witness_dict(w)
            d["set_a"] = " ".join(map(str, d["set_a"]))
            d["set_b"] = " ".join(map(str, d["set_b"]))
            rows.append([csv_cell(d[c]) for c in WITNESS_COLUMNS])
        text = csv_table(WITNESS_COLUMNS, rows)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    write_text(destination, text)
