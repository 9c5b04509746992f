"""Exception hierarchy shared by every module."""


class RhizomeError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class ConfigurationError(RhizomeError, ValueError):
    """Invalid parameters, terrain or scenario."""


class DomainError(RhizomeError, ValueError):
    """A position or index outside the simulation domain or inside an obstacle."""


class LayoutDegeneracyError(RhizomeError):
    """Two roots reach the same junction at exactly the same time."""


class DegenerateGeometryError(RhizomeError, ValueError):
    """Collinear points, vanished fronts and similar degenerate inputs."""


class SingularNetworkError(RhizomeError):
    """A resistor network with floating nodes.

    ``nodes`` lists the nodes with no resistive path to a fixed potential.
    """

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = tuple(nodes)
