"""Power and sample size for cluster randomized and stepped wedge trials."""

import json as _json

from . import _core
from ._core import (
    DomainError,
    InvalidParameter,
    ValidationError,
    central_f_cdf,
    central_f_quantile,
    de_ancova_prepost,
    de_simple,
    de_stepped_wedge,
    de_three_measurement,
    noncentral_f_cdf,
    power_from_f,
    preset_names,
)

__all__ = [
    "DomainError",
    "InvalidParameter",
    "ValidationError",
    "analytic_power",
    "central_f_cdf",
    "central_f_quantile",
    "cluster_covariance",
    "dataset_csv",
    "de_ancova_prepost",
    "de_simple",
    "de_stepped_wedge",
    "de_three_measurement",
    "empirical_power",
    "noncentral_f_cdf",
    "power_from_f",
    "preset",
    "preset_names",
]


def _source(spec):
    # Preset name, JSON text, or an already-decoded spec document.
    if isinstance(spec, dict):
        return _json.dumps(spec)
    return spec


def preset(name):
    """Spec document of a built-in scenario, as a dict."""
    return _json.loads(_core.preset_document(name))


def analytic_power(spec, ddf_policy=None):
    return _core.analytic_power(_source(spec), ddf_policy)


def empirical_power(spec, replicates=1000, seed=1, threads=0):
    return _core.empirical_power(_source(spec), replicates, seed, threads)


def dataset_csv(spec):
    return _core.dataset_csv(_source(spec))


def cluster_covariance(spec, cluster_index=1, correlation=False):
    return _core.cluster_covariance(_source(spec), cluster_index, correlation)
