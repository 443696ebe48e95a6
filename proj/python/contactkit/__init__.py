"""Contact-order classification and continuation for factorized slow-fast systems.

The package wraps a C++ core handling systems of the form
``z' = N(z) f(z) + eps * G(z, eps)``: critical-manifold projection,
layer spectra, contact-order classification with fold/cusp coefficients,
pseudo-arclength continuation of contact curves, and adaptive integration
of fibers and full trajectories.
"""

from contactkit._core import (
    Error,
    Model,
    classify,
    contact_determinant,
    continue_contact_curve,
    fibers,
    find_contact_point,
    find_equilibrium,
    load_model,
    load_model_from_file,
    model_names,
    project_to_manifold,
    simulate,
    spectrum,
    validate_provider,
)

__version__ = "0.1.0"

__all__ = [
    "Error",
    "Model",
    "classify",
    "contact_determinant",
    "continue_contact_curve",
    "fibers",
    "find_contact_point",
    "find_equilibrium",
    "load_model",
    "load_model_from_file",
    "model_names",
    "project_to_manifold",
    "simulate",
    "spectrum",
    "validate_provider",
]
