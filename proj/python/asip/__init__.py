from ._core import (
    CapacityError,
    Chain,
    ConstructionError,
    InputError,
    __version__,
    battery_chain,
    battery_names,
    build_blocks,
    covariance,
    ks_curve,
    load_chain,
    lp_norm,
    mean,
    mixing,
    parse_chain,
    variance,
)

__all__ = [
    "CapacityError",
    "Chain",
    "ConstructionError",
    "InputError",
    "__version__",
    "battery_chain",
    "battery_names",
    "build_blocks",
    "covariance",
    "ks_curve",
    "load_chain",
    "lp_norm",
    "mean",
    "mixing",
    "parse_chain",
    "variance",
]
