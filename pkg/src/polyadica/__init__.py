"""Finite distributive-lattice duality and a coherent-logic chase workbench."""

from importlib import resources

__version__ = "0.1.0"


def three_models_path():
    """Filesystem path of the bundled three-model example theory."""
    return resources.files(__name__) / "data" / "three_models.thy"
