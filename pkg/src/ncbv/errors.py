"""Exception types shared across the engine."""


class ContractionError(ValueError):
    """Slot signatures of two tensors do not admit the requested pairing."""


class SingularPairingError(ValueError):
    """A scalar product that must be invertible is degenerate.

    The ``radical`` attribute holds a basis (lists of rational coordinates)
    of the null space of the offending Gram matrix.
    """

    def __init__(self, message, radical=()):
        super().__init__(message)
        self.radical = list(radical)


class HomotopyError(ValueError):
    """A homotopy operator fails one of its defining identities.

    ``failures`` is a list of (check name, witness indices) pairs.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class ConstructionError(RuntimeError):
    """The built-in homotopy recipe does not apply; supply H manually."""


class MalformedGraphError(ValueError):
    """A flag structure violates the ribbon-graph axioms."""


class InputError(ValueError):
    """Graph contraction was asked for data the algebra does not provide."""


class TadpoleError(ValueError):
    """A higher product has a nonzero self-contraction, so the graph sum
    would not close; the tadpole condition must hold before summing."""


class WindowError(ValueError):
    """A residual window exceeds what the supplied truncation determines.

    ``required`` holds the (max letters, max loop order) the caller would
    need to supply.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
