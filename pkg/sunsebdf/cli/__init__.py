"""Command line front end: convergence tables, DOC kernel figures and stability checks."""

from ._commands import (
    DocFigure,
    build_parser,
    check_graded,
    check_random,
    default_random_seeds,
    figure_doc,
    main,
    screen_seeds,
    table_graded,
    table_random,
)
from .report import ExperimentReport, ReportRow
