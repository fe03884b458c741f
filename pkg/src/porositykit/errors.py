"""Exception hierarchy shared by all modules."""


class PorosityKitError(Exception):
    """Base class for every error raised by porositykit."""


class InvalidArgument(PorosityKitError, ValueError):
    pass


class InstanceTooLarge(PorosityKitError):
    """A construction or sweep would exceed the supported depth or size."""


class DegenerateBall(PorosityKitError):
    """The reference ball carries no mass, so relative porosity is undefined."""


class UndefinedAtPoint(PorosityKitError):
    """A zero-mass cube lies on the digit path of the point."""
