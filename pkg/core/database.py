"""
Core ergoprobe - Run Archive
SQLite store of resolved run configs and their JSON reports
"""
import json
import logging
import os
import sqlite3
from datetime import datetime
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)

# bumped whenever the runs table changes shape
SCHEMA_VERSION = 1

_COLUMNS = "id, command, config, report, exit_code, tool_version, created_at"


class ReportArchive:
    """
    One row per CLI run: command, resolved RunConfig (JSON), report text, exit code

    Usable as a context manager; the connection closes on exit.
    """

    def __init__(self, db_path: str, tool_version: str = ""):
        self.db_path = db_path
        self.tool_version = tool_version
        self.conn: Optional[sqlite3.Connection] = None
        self._connect()
        self._setup_tables()

    def _connect(self):
        """Open the archive file; rows come back as sqlite3.Row"""
        db_dir = os.path.dirname(self.db_path)
        if db_dir:
            os.makedirs(db_dir, exist_ok=True)
        self.conn = sqlite3.connect(self.db_path)
        self.conn.row_factory = sqlite3.Row

    def _setup_tables(self):
        """Create the runs table, refusing archives written by a newer schema"""
        version = self.conn.execute("PRAGMA user_version").fetchone()[0]
        if version > SCHEMA_VERSION:
            self.close()
            raise sqlite3.DatabaseError(
                f"{self.db_path} has archive schema {version}, this build reads {SCHEMA_VERSION}")
        with self.conn:
            self.conn.execute('''
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    config TEXT NOT NULL,
                    report TEXT NOT NULL,
                    exit_code INTEGER NOT NULL,
                    tool_version TEXT NOT NULL DEFAULT '',
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            ''')
            self.conn.execute('CREATE INDEX IF NOT EXISTS idx_runs_command ON runs(command)')
            self.conn.execute(f"PRAGMA user_version = {SCHEMA_VERSION}")

    def add_run(self, command: str, config: Dict, report_json: str, exit_code: int = 0) -> Optional[int]:
        """Store one run; returns its id"""
        try:
            with self.conn:
                cursor = self.conn.execute('''
                    INSERT INTO runs (command, config, report, exit_code, tool_version, created_at)
                    VALUES (?, ?, ?, ?, ?, ?)
                ''', (command, json.dumps(config, sort_keys=True), report_json, exit_code,
                      self.tool_version, datetime.now().isoformat()))
            return cursor.lastrowid
        except sqlite3.Error as e:
            logger.error("Archive add_run: %s", e)
            return None

    def get_run(self, run_id: int) -> Optional[Dict]:
        row = self.conn.execute(f"SELECT {_COLUMNS} FROM runs WHERE id = ?", (run_id,)).fetchone()
        return self._row_dict(row) if row else None

    def list_runs(self, command: str = None) -> List[Dict]:
        """All runs, optionally filtered by command, oldest first"""
        query = f"SELECT {_COLUMNS} FROM runs WHERE 1=1"
        params = []

        if command:
            query += " AND command = ?"
            params.append(command)

        query += " ORDER BY id"
        return [self._row_dict(row) for row in self.conn.execute(query, params)]

    @staticmethod
    def _row_dict(row: sqlite3.Row) -> Dict:
        run = dict(row)
        run["config"] = json.loads(run["config"])
        return run

    def delete_run(self, run_id: int):
        with self.conn:
            self.conn.execute('DELETE FROM runs WHERE id = ?', (run_id,))

    def close(self):
        if self.conn:
            self.conn.close()
            self.conn = None

    def __enter__(self) -> "ReportArchive":
        return self

    def __exit__(self, *exc):
        self.close()
