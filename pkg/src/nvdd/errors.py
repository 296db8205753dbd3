"""Exception types raised by nvdd."""


class NVDDError(ValueError):
    """Base class for invalid inputs and unsupported configurations."""


class DegenerateTargetError(NVDDError):
    """The target has zero average-Hamiltonian frequency, so no dip period exists."""


class InvalidHarmonicError(NVDDError):
    pass


class SequenceError(NVDDError):
    """Pulse sequence cannot be constructed (overlap, bad timing, non-periodic frame)."""


class TruncationError(NVDDError):
    pass


class ClosedCrossingError(NVDDError):
    """Both the f_z and f_perp couplings vanish at the requested harmonic."""


class NoDipError(NVDDError):
    """The requested dip kind has a zero coupling coefficient at this harmonic."""


class ConfigError(NVDDError):
    pass
