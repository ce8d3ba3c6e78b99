"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed input data: skeleton files, records, ratings, config."""


class ContractError(ValueError):
    """A caller violated an operation's precondition (shape/length/state)."""


class SimulationDiverged(RuntimeError):
    """The dynamics produced a non-finite state."""

    def __init__(self, step_index: int):
        super().__init__(f"simulation diverged at step {step_index}")
        self.step_index = step_index


class StoreError(Exception):
    """Base class for solution-store failures."""


class NotFoundError(StoreError):
    """Unknown solution id."""


class DuplicateIdError(StoreError):
    """A solution with this id already exists."""


class SchemaVersionError(StoreError):
    """A stored document declares an unsupported schema version."""
