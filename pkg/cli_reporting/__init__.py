"""Command line, report tables and curve files."""

__all__ = [
    "Command",
    "ReportBundle",
    "run_cli",
    "write_report",
    "emit_curves",
    "load_records",
]


def __getattr__(name):
    if name in ("Command", "ReportBundle"):
        from cli_reporting import schemas
        return getattr(schemas, name)
    if name == "run_cli":
        from cli_reporting.cli import run_cli
        return run_cli
    if name in ("write_report", "emit_curves", "load_records"):
        from cli_reporting import reports
        return getattr(reports, name)
    raise AttributeError(name)
