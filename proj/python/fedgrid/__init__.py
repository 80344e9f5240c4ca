"""Federated smart-grid simulator: federated forecasting, a hash-chained
energy ledger and regional accounting reports."""

from ._fedgrid import (
    AggregationError,
    ContractViolation,
    DatasetError,
    FedgridError,
    LedgerError,
    NonFiniteWeightsError,
    ParseError,
    ReportError,
    ValidationError,
    aggregate,
    client_update,
    co2_reduction,
    consumption_share,
    global_round_time,
    render_report,
    report_tables,
    sha256_hex,
    simulate,
    verify_ledger,
    yearly_potential,
)

__all__ = [
    "AggregationError",
    "ContractViolation",
    "DatasetError",
    "FedgridError",
    "LedgerError",
    "NonFiniteWeightsError",
    "ParseError",
    "ReportError",
    "ValidationError",
    "aggregate",
    "client_update",
    "co2_reduction",
    "consumption_share",
    "global_round_time",
    "render_report",
    "report_tables",
    "sha256_hex",
    "simulate",
    "verify_ledger",
    "yearly_potential",
]
