from .artifact import ArtifactMixin, file_digest
from .base import BaseDBMixin
from .manager import RunLedger
from .path_seed import PathSeedMixin
from .run_log import RunLogMixin

__all__ = [
    "BaseDBMixin",
    "RunLogMixin",
    "PathSeedMixin",
    "ArtifactMixin",
    "RunLedger",
    "file_digest",
]
