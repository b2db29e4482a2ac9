import atexit
import sqlite3
from pathlib import Path

from ..common.types import DBError  # type: ignore


class BaseDBMixin:
    """运行台账的基础数据库 Mixin"""

    def __init__(self, db_path: str | Path):
        """
        Args:
            db_path: 数据库文件路径，通常为输出目录下的 runs.db。
        """
        self._db_path: str = str(db_path)
        self._db: sqlite3.Connection | None = None
        atexit.register(self.close)

    def __enter__(self) -> "BaseDBMixin":
        self.initialize()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()

    def initialize(self) -> None:
        """打开连接，做完整性检查并建表。"""
        try:
            self._db = sqlite3.connect(self._db_path, check_same_thread=False)
            self._db.execute("PRAGMA foreign_keys = ON")
            self._db.execute("PRAGMA journal_mode = WAL")
            result = self._db.execute("PRAGMA integrity_check").fetchone()
            if result is None or result[0] != "ok":
                raise DBError(f"数据库完整性检查失败: {result[0] if result else '无结果'}")
            self._create_tables()
        except sqlite3.Error as e:
            self._discard()
            raise DBError(f"无法打开运行台账: {e!s}")
        except DBError:
            self._discard()
            raise
        except Exception as e:
            self._discard()
            raise DBError(f"初始化运行台账失败: {e!s}")

    def _discard(self) -> None:
        if self._db:
            self._db.close()
            self._db = None

    def _create_tables(self) -> None:
        raise NotImplementedError

    def close(self) -> None:
        """关闭连接。"""
        if self._db is not None:
            try:
                self._db.execute("PRAGMA wal_checkpoint")
                self._db.close()
            except sqlite3.Error as e:
                raise DBError(f"关闭运行台账失败：{e!s}")
            finally:
                self._db = None
