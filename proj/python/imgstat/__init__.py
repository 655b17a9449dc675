"""Python front end for the imgstat corpus statistics library."""

import json

from ._imgstat import (
    ImgstatError,
    __version__,
    axis_profile,
    detect_spikes,
    fit_power_law,
    fit_region_law,
    fit_weibull,
    moment_summary,
    power_law_field,
    power_spectrum,
    region_areas,
    welch_t_test,
)
from . import _imgstat


def default_config():
    return json.loads(_imgstat.default_config_json())


def analyze(directory, threads=None, **options):
    """Analyze every image under ``directory``; returns the corpus statistics dict.

    Keyword options override fields of :func:`default_config`.
    """
    config = default_config()
    unknown = set(options) - set(config)
    if unknown:
        raise ImgstatError("BadConfig: unknown option(s) " + ", ".join(sorted(unknown)))
    config.update(options)
    return json.loads(_imgstat.analyze_json(str(directory), json.dumps(config), threads))


def compare(stats_a, stats_b):
    return json.loads(_imgstat.compare_json(json.dumps(stats_a), json.dumps(stats_b)))


__all__ = [
    "ImgstatError",
    "__version__",
    "analyze",
    "axis_profile",
    "compare",
    "default_config",
    "detect_spikes",
    "fit_power_law",
    "fit_region_law",
    "fit_weibull",
    "moment_summary",
    "power_law_field",
    "power_spectrum",
    "region_areas",
    "welch_t_test",
]
