"""Binary spatial field reconstruction from local likelihood-ratio decisions."""

import json as _json

import numpy as _np

from . import _core
from ._core import ConfigError, DomainError, NumericalError, bvn_cdf, binorm_orthant

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalError",
    "SBlue",
    "WgplrtDetector",
    "binorm_orthant",
    "bvn_cdf",
    "calibrate",
    "knn_predict",
    "preset",
    "preset_names",
    "resolve_config",
    "run_pipeline",
    "scene_points",
    "warp_forward",
    "warp_inverse",
]


def _dump(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def preset_names():
    return list(_core.preset_names())


def preset(name):
    """The preset as a configuration dictionary."""
    return _json.loads(_core.preset_json(name))


def resolve_config(config):
    """Validates a configuration and returns it with the preset expanded."""
    return _json.loads(_core.resolve_config(_dump(config)))


def scene_points(config):
    """(queries, p_sensors, i_sensors) as (n, 2) arrays."""
    return _core.scene_points(_dump(config))


def calibrate(config):
    """Thresholds, transition matrices and ROC curves keyed by test name."""
    return _core.calibrate(_dump(config))


def run_pipeline(config, write_outputs=False):
    """Runs the full experiment and returns averaged metrics per algorithm."""
    return _core.run_pipeline(_dump(config), write_outputs)


def warp_forward(warp, z):
    return _core.warp_forward(_dump(warp), _np.asarray(z, dtype=float))


def warp_inverse(warp, v):
    return _core.warp_inverse(_dump(warp), _np.asarray(v, dtype=float))


def knn_predict(decisions, sensors, queries, k):
    return _core.knn_predict(
        _np.asarray(decisions, dtype=_np.int32),
        _np.asarray(sensors, dtype=float),
        _np.asarray(queries, dtype=float),
        int(k),
    )


class WgplrtDetector(_core.WgplrtDetector):
    """WGPLRT for point observations at the given times.

    h0 and h1 are {"kernel": {...}, "warp": {...}} dictionaries.
    """

    def __init__(self, h0, h1, times, sigma):
        super().__init__(_dump(h0), _dump(h1), list(times), float(sigma))


class SBlue(_core.SBlue):
    """S-BLUE for fixed sensor and query locations; channels are 2x2 matrices."""

    def __init__(self, sensors, queries, kernel, mean, c, channels, bernoulli_diagonal=True):
        super().__init__(
            _np.asarray(sensors, dtype=float),
            _np.asarray(queries, dtype=float),
            _dump(kernel),
            float(mean),
            float(c),
            [_np.asarray(u, dtype=float) for u in channels],
            bernoulli_diagonal,
        )

    def predict(self, decisions):
        return super().predict(_np.asarray(decisions, dtype=_np.int32))
