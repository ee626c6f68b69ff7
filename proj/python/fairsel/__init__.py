"""Fair selection policies: single-step solvers, lower-bound constructions and
a multi-step population simulator. Instances are passed around as JSON text;
``loads`` and ``dumps`` convert to and from dicts."""

import json
import os

_here = os.path.dirname(os.path.abspath(__file__))
if os.path.exists(os.path.join(_here, "data", "fico_groups.csv")):
    os.environ.setdefault("FAIRSEL_DATA_DIR", os.path.join(_here, "data"))

from ._fairsel import (  # noqa: E402
    IoError,
    assumptions,
    categories,
    fair_opt,
    lb_general,
    lb_tv,
    normalize_instance,
    optimal_policy,
    preset_names,
    price_of_fairness,
    price_of_simplicity,
    read_instance,
    run_preset,
    simulate,
    synth_gaussian,
    synth_geometric_failure,
    write_instance,
)


def loads(text):
    return json.loads(text)


def dumps(instance):
    return normalize_instance(json.dumps(instance))


__all__ = [
    "IoError",
    "assumptions",
    "categories",
    "dumps",
    "fair_opt",
    "lb_general",
    "lb_tv",
    "loads",
    "normalize_instance",
    "optimal_policy",
    "preset_names",
    "price_of_fairness",
    "price_of_simplicity",
    "read_instance",
    "run_preset",
    "simulate",
    "synth_gaussian",
    "synth_geometric_failure",
    "write_instance",
]
