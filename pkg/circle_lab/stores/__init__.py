"""Persistence: Fourier table dumps and command reports."""

from circle_lab.stores.fourier_table_store import export_table_csv, load_table, save_table
from circle_lab.stores.report_store import ReportStore, to_jsonable

__all__ = ["ReportStore", "export_table_csv", "load_table", "save_table", "to_jsonable"]
