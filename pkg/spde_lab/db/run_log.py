import sqlite3
import time
import uuid

from ..common.types import (  # type: ignore
    DBError,
    ExperimentKind,
    RunRecord,
    RunStatus,
)


class RunLogMixin:
    """运行记录相关功能"""

    _db: sqlite3.Connection | None

    def _create_tables(self) -> None:
        """创建运行记录表及其索引。"""
        if not self._db:
            raise DBError("数据库未初始化")
        try:
            with self._db:
                self._db.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id TEXT PRIMARY KEY,
                    kind TEXT NOT NULL,
                    config_hash TEXT NOT NULL,
                    master_seed TEXT NOT NULL,
                    status TEXT NOT NULL,
                    started_at INTEGER NOT NULL,
                    finished_at INTEGER,
                    message TEXT
                )""")
                self._db.execute("CREATE INDEX IF NOT EXISTS idx_runs_kind ON runs(kind)")
                self._db.execute(
                    "CREATE INDEX IF NOT EXISTS idx_runs_config ON runs(config_hash)"
                )
        except sqlite3.Error as e:
            raise DBError(f"创建运行记录表失败: {e!s}")

    def add_run(self, kind: ExperimentKind, config_hash: str, master_seed: int) -> str:
        """
        登记一次新运行，状态为 running。

        Returns:
            新运行的 ID。

        Raises:
            DBError: 数据库未初始化或写入失败。
        """
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        run_id = str(uuid.uuid4())
        try:
            with self._db:
                self._db.execute(
                    "INSERT INTO runs (id, kind, config_hash, master_seed, status, started_at) VALUES (?, ?, ?, ?, ?, ?)",
                    (
                        run_id,
                        kind.value,
                        config_hash,
                        str(master_seed),
                        RunStatus.Running.value,
                        int(time.time()),
                    ),
                )
            return run_id
        except sqlite3.Error as e:
            raise DBError(f"登记运行失败: {e!s}")

    def finish_run(self, run_id: str, status: RunStatus, message: str | None = None) -> bool:
        """更新运行状态与结束时间。"""
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        try:
            with self._db:
                cursor = self._db.execute(
                    "UPDATE runs SET status = ?, finished_at = ?, message = ? WHERE id = ?",
                    (status.value, int(time.time()), message, run_id),
                )
                return cursor.rowcount > 0
        except sqlite3.Error as e:
            raise DBError(f"更新运行状态失败：{e!s}")

    def get_run(self, run_id: str) -> RunRecord | None:
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        try:
            row = self._db.execute(
                "SELECT id, kind, config_hash, master_seed, status, started_at, finished_at, message FROM runs WHERE id = ?",
                (run_id,),
            ).fetchone()
        except sqlite3.Error as e:
            raise DBError(f"获取运行记录失败：{e!s}")
        return self._parse_run(row) if row else None

    def get_runs(
        self, kind: ExperimentKind | None = None, limit: int = 100, offset: int = 0
    ) -> list[RunRecord]:
        """按开始时间倒序列出运行记录。"""
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        query = "SELECT id, kind, config_hash, master_seed, status, started_at, finished_at, message FROM runs WHERE 1=1"
        params: list = []
        if kind:
            query += " AND kind = ?"
            params.append(kind.value)
        query += " ORDER BY started_at DESC, id DESC LIMIT ? OFFSET ?"
        params.extend([limit, offset])
        try:
            rows = self._db.execute(query, params).fetchall()
        except sqlite3.Error as e:
            raise DBError(f"获取运行记录失败：{e!s}")
        return [self._parse_run(row) for row in rows]

    def _parse_run(self, row) -> RunRecord:
        run_id, kind, config_hash, seed, status, started, finished, message = row
        return RunRecord(
            id=run_id,
            kind=ExperimentKind(kind),
            config_hash=config_hash,
            master_seed=int(seed),
            status=RunStatus(status),
            started_at=started,
            finished_at=finished,
            message=message,
        )
