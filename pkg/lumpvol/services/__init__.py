"""Service layer: one module per numerical concern."""

__all__ = [
    "closed_form",
    "convergence",
    "kw_vortex",
    "l2_metric",
    "moduli_volume",
    "rational_maps",
    "sphere_geometry",
]
