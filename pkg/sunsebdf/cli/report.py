"""Contains the report every table command produces, and its CSV and JSON forms."""

from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Any, TextIO
import csv
import json
import math


@dataclass
class ReportRow:
    """One mesh level of a convergence table."""

    N: int
    max_step: float = math.nan
    """τ(N)."""
    error: float = math.nan
    """e(N)."""
    order: float | None = None
    """Empty on the first row of each case and after a failed row."""
    max_ratio: float = math.nan
    first_step_ratio: float = math.nan
    violations: int | None = None
    """N_1, only reported for BDF3."""
    gamma: float | None = None
    seed: int | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


COLUMNS = ["N", "tau", "e_N", "order", "r_max", "tau_over_tau1", "N1", "gamma", "seed", "status"]


def _cell(value: Any) -> str:
    match value:
        case None:
            return ""
        case float() if math.isnan(value):
            return ""
        case float():
            return f"{value:.17g}"
        case list() | tuple():
            return " ".join(map(str, value))
        case _:
            return str(value)


class ExperimentReport:
    """The result of a table command, with everything needed to re-run it."""

    def __init__(self, command: str, config: dict[str, Any]):
        """Creates an empty report.

        Args:
            command (str): The subcommand that produced the report.
            config (dict[str, Any]): The effective configuration, echoed as provenance.
        """
        self.command = command
        self.config = config
        """Method, mesh family, gamma or seeds, levels, Newton tolerances, PRNG and starter."""
        self.rows: list[ReportRow] = []
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        """Only carried in the JSON envelope, so CSV output is reproducible byte for byte."""
        self.checked = False
        self.check_failures: list[str] = []
        """Filled by `--check`; empty when the check passed or was not requested."""

    def add(self, row: ReportRow):
        self.rows.append(row)

    def cases(self) -> dict[Any, list[ReportRow]]:
        """Rows grouped by gamma or seed, in insertion order."""
        groups: dict[Any, list[ReportRow]] = {}
        for row in self.rows:
            groups.setdefault((row.gamma, row.seed), []).append(row)
        return groups

    def to_csv(self, out: TextIO):
        for key, value in self.config.items():
            out.write(f"# {key}={_cell(value)}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow(
                _cell(v)
                for v in (
                    r.N,
                    r.max_step,
                    r.error,
                    r.order,
                    r.max_ratio,
                    r.first_step_ratio,
                    r.violations,
                    r.gamma,
                    r.seed,
                    r.status,
                )
            )

    def to_json(self, out: TextIO):
        rows = []
        for r in self.rows:
            d = asdict(r)
            rows.append({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()})
        json.dump(
            {
                "command": self.command,
                "config": self.config,
                "timestamp": self.timestamp,
                "rows": rows,
                "check": {"requested": self.checked, "failures": self.check_failures},
            },
            out,
            indent=2,
        )
        out.write("\n")
