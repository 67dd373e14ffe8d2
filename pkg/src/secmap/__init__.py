"""secmap: goal-to-operation security requirement catalog toolchain."""

from .model import (
    Agent,
    Catalog,
    CatalogMetadata,
    Control,
    Framework,
    Goal,
    InvalidCatalogError,
    Level,
    MalformedIdError,
    OperationTask,
    Phase,
    SourceRef,
    StructuralViolation,
    derive_level,
    parent_of,
    validate_catalog,
)

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "Catalog",
    "CatalogMetadata",
    "Control",
    "Framework",
    "Goal",
    "InvalidCatalogError",
    "Level",
    "MalformedIdError",
    "OperationTask",
    "Phase",
    "SourceRef",
    "StructuralViolation",
    "derive_level",
    "parent_of",
    "validate_catalog",
    "__version__",
]
