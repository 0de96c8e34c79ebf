"""Local explanations for black-box classifiers.

Perturbations respect feature dependencies (connected superpixels, token
groups) and the local surrogate is a kernel epsilon-SVR; a weighted ridge
surrogate is available for comparison.
"""

from ._core import (
    BlackBoxError,
    Error,
    ExplainConfig,
    SolverError,
    adjacency,
    approx_error,
    grid,
    overlay,
    r_squared,
    read_ppm,
    sample_connected,
    slic,
    write_ppm,
)
from . import _core

__all__ = [
    "BlackBoxError",
    "Error",
    "ExplainConfig",
    "SolverError",
    "adjacency",
    "approx_error",
    "config",
    "explain_image",
    "explain_text",
    "grid",
    "overlay",
    "r_squared",
    "read_ppm",
    "sample_connected",
    "slic",
    "write_ppm",
]


def config(**options):
    """Build an ExplainConfig; ``lambda`` may be passed as ``lambda_``."""
    cfg = ExplainConfig()
    for name, value in options.items():
        if not hasattr(cfg, name):
            raise TypeError(f"unknown option {name!r}")
        setattr(cfg, name, value)
    return cfg


def explain_image(image, labels, blackbox, instance_id="", **options):
    """Explain one (H, W, 3) uint8 image over the segments in ``labels``.

    ``blackbox`` is a spec string (``builtin:...``, ``subprocess:...``,
    ``http:...``) or a callable mapping a list of images to probabilities.
    Returns the explanation as a dict.
    """
    return _core.explain_image(image, labels, blackbox, config(**options), instance_id)


def explain_text(tokens, blackbox, groups=None, window=1, instance_id="", **options):
    """Explain a token sequence; ``groups`` partitions token indices."""
    if isinstance(tokens, str):
        tokens = tokens.split()
    return _core.explain_text(list(tokens), blackbox, config(**options), groups, window, instance_id)
