"""Exception types shared across the package."""


class NotKahler(ValueError):
    """The field has left the Kähler cone (metric density not positive)."""

    def __init__(self, min_u, floor=None):
        self.min_u = float(min_u)
        self.floor = floor
        msg = f"metric density min {self.min_u:.6g}"
        if floor is not None:
            msg += f" <= kahler_floor {floor:.3g}"
        super().__init__(msg)


class NotConvex(NotKahler):
    """Toric symplectic potential with u'' <= 0 somewhere on the grid."""


class StepFailure(RuntimeError):
    pass


class PathTooCoarse(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class BallTooLarge(ValueError):
    pass


class RadiiTooSmall(ValueError):
    pass


class QuadratureNotConverged(RuntimeError):
    pass


class DivergentBound(ValueError):
    pass
