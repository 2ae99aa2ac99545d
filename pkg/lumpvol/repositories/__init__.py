"""Repository layer for report output."""

from lumpvol.repositories.report_repository import ReportRepository

__all__ = ["ReportRepository"]
