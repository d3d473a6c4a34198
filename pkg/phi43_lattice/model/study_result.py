from __future__ import annotations # Allow referencing enclosing class in typings
from typing import Any, Dict, List, Optional

from .study_config import StudyConfig


class StudyTable:
    """One comma-separated output table."""

    name: str
    """File stem, e.g. 'convergence' for convergence.csv."""

    columns: List[str]

    rows: List[List[Any]]

    def __init__(self, name: str, columns: List[str], rows: Optional[List[List[Any]]] = None) -> None:
        self.name = name
        self.columns = list(columns)
        self.rows = [] if rows is None else rows

    def append(self, row: List[Any]) -> None:
        self.rows.append(list(row))

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"StudyTable({self.name}, {len(self.rows)} rows)"


class StudyResult:
    """Tables, summary diagnostics and verdicts of one study run."""

    config: StudyConfig

    tables: List[StudyTable]

    summary: Dict[str, Any]
    """JSON-serialisable fit diagnostics and verdicts."""

    def __init__(self, config: StudyConfig, tables: List[StudyTable], summary: Dict[str, Any]) -> None:
        self.config = config
        self.tables = tables
        self.summary = summary

    def table(self, name: str) -> StudyTable:
        for table in self.tables:
            if table.name == name:
                return table
        raise KeyError(name)

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'study': self.config.study.value,
            'tables': [table.name for table in self.tables],
            'summary': self.summary
        }
