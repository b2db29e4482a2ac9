import hashlib
import sqlite3
from pathlib import Path

from ..common.types import ArtifactRecord, DBError  # type: ignore


def file_digest(path: str | Path) -> tuple[str, int]:
    """文件内容的 SHA-256 与字节数。"""
    data = Path(path).read_bytes()
    return hashlib.sha256(data).hexdigest(), len(data)


class ArtifactMixin:
    """产出文件相关功能"""

    _db: sqlite3.Connection | None

    def _create_tables(self) -> None:
        if not self._db:
            raise DBError("数据库未初始化")
        try:
            with self._db:
                self._db.execute("""
                CREATE TABLE IF NOT EXISTS artifacts (
                    run_id TEXT NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
                    name TEXT NOT NULL,
                    sha256 TEXT NOT NULL,
                    size INTEGER NOT NULL,
                    PRIMARY KEY (run_id, name)
                )""")
        except sqlite3.Error as e:
            raise DBError(f"创建产出文件表失败: {e!s}")

    def add_artifact(self, run_id: str, path: str | Path, name: str | None = None) -> ArtifactRecord:
        """
        登记一个产出文件及其摘要。

        Args:
            run_id: 所属运行。
            path: 文件路径。
            name: 记录名，默认取文件名。
        """
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        try:
            digest, size = file_digest(path)
        except OSError as e:
            raise DBError(f"读取产出文件失败: {e!s}")
        record = ArtifactRecord(run_id=run_id, name=name or Path(path).name, sha256=digest, size=size)
        try:
            with self._db:
                self._db.execute(
                    "INSERT OR REPLACE INTO artifacts (run_id, name, sha256, size) VALUES (?, ?, ?, ?)",
                    (record.run_id, record.name, record.sha256, record.size),
                )
            return record
        except sqlite3.Error as e:
            raise DBError(f"登记产出文件失败: {e!s}")

    def get_artifacts(self, run_id: str) -> list[ArtifactRecord]:
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        try:
            rows = self._db.execute(
                "SELECT run_id, name, sha256, size FROM artifacts WHERE run_id = ? ORDER BY name",
                (run_id,),
            ).fetchall()
        except sqlite3.Error as e:
            raise DBError(f"获取产出文件失败：{e!s}")
        return [ArtifactRecord(*row) for row in rows]
