"""Exception hierarchy. Every error carries a short machine-readable ``kind``."""


class MelshiftError(Exception):
    kind = "error"


class ConfigError(MelshiftError, ValueError):
    kind = "config"


class ConfigMismatchError(ConfigError):
    kind = "config-mismatch"


class RankDeficientError(MelshiftError, ValueError):
    kind = "rank-deficient"

    def __init__(self, rank: int, full_rank: int):
        self.rank = rank
        self.full_rank = full_rank
        super().__init__(f"matrix is rank deficient: numerical rank {rank} < {full_rank}")


class AudioError(MelshiftError, ValueError):
    kind = "audio"


class MelfError(MelshiftError, ValueError):
    """Malformed MELF container."""

    kind = "melf"


class BadMagicError(MelfError):
    kind = "bad-magic"


class VersionMismatchError(MelfError):
    kind = "version-mismatch"


class TruncatedPayloadError(MelfError):
    kind = "truncated-payload"
