"""Exception hierarchy.

Every error raised on bad input or failed verification derives from
:class:`KWZError`.  The ``category`` attribute is the public name used in
structured (JSON) error reports; subclasses that refine a public failure
mode inherit their parent's category.
"""

from __future__ import annotations


class KWZError(Exception):
    category = "KWZError"
    #: exit code used by the CLI when this error escapes a subcommand
    exit_code = 2

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "category" not in cls.__dict__:
            parent = cls.__mro__[1]
            # direct children of KWZError define their own public category
            cls.category = cls.__name__ if parent is KWZError else parent.category


# --- combinatorics -----------------------------------------------------------

class NonManifoldEdge(KWZError):
    pass


class OrientationMismatch(KWZError):
    pass


class InconsistentOrientation(OrientationMismatch):
    """Two faces traverse a shared edge in the same direction."""


class NotSphere(KWZError):
    pass


class Disconnected(KWZError):
    pass


class InvalidMesh(KWZError):
    """Malformed face list (bad indices, repeated vertex in a face, ...)."""


# --- geometry ----------------------------------------------------------------

class DegenerateFace(KWZError):
    pass


class PhiOutOfRange(KWZError):
    pass


class SingularCoupling(KWZError):
    pass


class ZeroLengthSegment(KWZError):
    pass


class LayoutSingular(KWZError):
    pass


class CrossingDetected(KWZError):
    pass


class DecompositionFailed(KWZError):
    exit_code = 1


class IsometryResidual(KWZError):
    exit_code = 1


# --- linear algebra / SU(2) ---------------------------------------------------

class SvdFailure(KWZError):
    exit_code = 1


class NotUnitary(KWZError):
    exit_code = 1


class NonUnitQuaternion(KWZError):
    pass


class InconsistentPropagation(KWZError):
    exit_code = 1


class ZeroSpinor(KWZError):
    pass


# --- oracle / self-test -------------------------------------------------------

class TooLarge(KWZError):
    pass


class SelfTestFailed(KWZError):
    exit_code = 1

    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed
