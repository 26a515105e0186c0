import json
import logging
import sqlite3
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

logger = logging.getLogger("SYMKERNEL")

DRIFT_RTOL = 1e-9


class BaselineStore:
    """sqlite ledger of validation runs and the ratio intervals they observed"""

    def __init__(self, db_path: Path):
        try:
            self.db_path = Path(db_path)
            self.db_path.parent.mkdir(parents=True, exist_ok=True)
            self.conn = sqlite3.connect(str(self.db_path))
            self.conn.row_factory = sqlite3.Row
            self._create_tables()
        except (OSError, sqlite3.Error) as e:
            logger.error(f"Baseline store initialization error: {str(e)}")
            raise

    def _create_tables(self) -> None:
        with self.conn:
            self.conn.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    space TEXT NOT NULL,
                    config TEXT NOT NULL,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """)
            self.conn.execute("""
                CREATE TABLE IF NOT EXISTS baselines (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id INTEGER NOT NULL,
                    case_name TEXT NOT NULL,
                    count INTEGER NOT NULL,
                    min_ratio REAL NOT NULL,
                    max_ratio REAL NOT NULL,
                    geometric_mean REAL NOT NULL,
                    passed BOOLEAN NOT NULL,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                    FOREIGN KEY (run_id) REFERENCES runs (id)
                        ON DELETE CASCADE
                )
            """)

    def record_run(self, command: str, space: str, config: Mapping[str, Any]) -> int:
        with self.conn:
            cursor = self.conn.execute(
                "INSERT INTO runs (command, space, config) VALUES (?, ?, ?)",
                (command, space, json.dumps(dict(config), sort_keys=True)),
            )
        run_id = cursor.lastrowid
        assert run_id is not None
        return run_id

    def record_baseline(
        self, run_id: int, case: str, summary: Mapping[str, float], passed: bool
    ) -> None:
        with self.conn:
            self.conn.execute(
                """
                INSERT INTO baselines
                    (run_id, case_name, count, min_ratio, max_ratio, geometric_mean, passed)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    run_id,
                    case,
                    int(summary["count"]),
                    summary["min_ratio"],
                    summary["max_ratio"],
                    summary["geometric_mean"],
                    passed,
                ),
            )

    def last_baseline(self, case: str) -> Optional[Dict[str, Any]]:
        row = self.conn.execute(
            "SELECT * FROM baselines WHERE case_name = ? ORDER BY id DESC LIMIT 1",
            (case,),
        ).fetchone()
        return dict(row) if row else None

    def drifted(self, case: str, summary: Mapping[str, float]) -> bool:
        """True when the interval moved since the last recorded run of this case"""
        previous = self.last_baseline(case)
        if previous is None:
            return False
        for key in ("min_ratio", "max_ratio"):
            old, new = previous[key], summary[key]
            if abs(new - old) > DRIFT_RTOL * max(abs(old), abs(new)):
                logger.warning(f"{case}: {key} drifted from {old!r} to {new!r}")
                return True
        return False

    def runs(self) -> List[Dict[str, Any]]:
        rows = self.conn.execute("SELECT * FROM runs ORDER BY id").fetchall()
        return [dict(row) for row in rows]

    def close(self) -> None:
        self.conn.close()
