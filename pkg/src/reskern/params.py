"""Hyperparameters shared by the analytic kernels and the finite-width network."""

from dataclasses import asdict, dataclass, replace

HEADS = ("Eq", "Tr", "GAP")


@dataclass(frozen=True)
class KernelParams:
    """Architecture of a 1-D convolutional residual network.

    Attributes
    ----------
    L : int
        Number of residual blocks.
    q : int
        Odd filter size; windows run over offsets -(q-1)/2 .. (q-1)/2.
    d : int
        Number of pixels (circular).
    C0 : int
        Input channels.
    alpha : float
        Weight of the residual branch.
    cv, cw : float
        Variance normalizers of the V and W weights.
    head : str
        Readout: "Eq" (pixel 0), "Tr" (full linear) or "GAP" (average pooling).
    skip : bool
        False drops the identity path, giving the plain convolutional kernels.
    """

    L: int = 2
    q: int = 3
    d: int = 4
    C0: int = 3
    alpha: float = 1.0
    cv: float = 2.0
    cw: float = 1.0
    head: str = "Eq"
    skip: bool = True

    def __post_init__(self):
        for name in ("L", "q", "d", "C0"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.q < 1 or self.q % 2 == 0:
            raise ValueError(f"q must be an odd positive integer, got {self.q}")
        if self.d < self.q:
            raise ValueError(f"d must be >= q, got d={self.d}, q={self.q}")
        if self.C0 < 2:
            raise ValueError(f"C0 must be >= 2, got {self.C0}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not (self.cv > 0 and self.cw > 0):
            raise ValueError(f"cv and cw must be positive, got {self.cv}, {self.cw}")
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}, got {self.head!r}")

    @property
    def normalized_regime(self) -> bool:
        return self.cv == 2.0 and self.cw == 1.0

    @property
    def offsets(self) -> range:
        h = (self.q - 1) // 2
        return range(-h, h + 1)

    def with_(self, **changes) -> "KernelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)
