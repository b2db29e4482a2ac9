from .artifact import ArtifactMixin
from .base import BaseDBMixin
from .path_seed import PathSeedMixin
from .run_log import RunLogMixin


class RunLedger(BaseDBMixin, RunLogMixin, PathSeedMixin, ArtifactMixin):
    """运行台账主类"""

    def _create_tables(self) -> None:
        RunLogMixin._create_tables(self)
        PathSeedMixin._create_tables(self)
        ArtifactMixin._create_tables(self)
