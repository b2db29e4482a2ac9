import sqlite3

from ..common.types import DBError  # type: ignore


class PathSeedMixin:
    """路径种子相关功能"""

    _db: sqlite3.Connection | None

    def _create_tables(self) -> None:
        """创建路径种子表。种子为 64 位无符号整数，以文本保存。"""
        if not self._db:
            raise DBError("数据库未初始化")
        try:
            with self._db:
                self._db.execute("""
                CREATE TABLE IF NOT EXISTS path_seeds (
                    run_id TEXT NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
                    path_index INTEGER NOT NULL,
                    seed TEXT NOT NULL,
                    PRIMARY KEY (run_id, path_index)
                )""")
        except sqlite3.Error as e:
            raise DBError(f"创建路径种子表失败: {e!s}")

    def add_path_seeds(self, run_id: str, seeds: list[int]) -> int:
        """
        批量登记一次运行的路径种子，下标即路径编号。

        Returns:
            写入的行数。
        """
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        try:
            with self._db:
                self._db.executemany(
                    "INSERT OR REPLACE INTO path_seeds (run_id, path_index, seed) VALUES (?, ?, ?)",
                    [(run_id, index, str(seed)) for index, seed in enumerate(seeds)],
                )
            return len(seeds)
        except sqlite3.Error as e:
            raise DBError(f"登记路径种子失败: {e!s}")

    def get_path_seeds(self, run_id: str) -> list[int]:
        if not self._db:
            raise DBError("数据库未初始化或连接已关闭")
        try:
            rows = self._db.execute(
                "SELECT seed FROM path_seeds WHERE run_id = ? ORDER BY path_index",
                (run_id,),
            ).fetchall()
        except sqlite3.Error as e:
            raise DBError(f"获取路径种子失败：{e!s}")
        return [int(row[0]) for row in rows]
