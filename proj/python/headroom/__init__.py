"""Python bindings for the headroom query-plan search engine."""

from ._core import (
    Catalog,
    HeadroomError,
    Statistics,
    canonical_sql,
    count_oracle,
    decode_latent,
    default_plan,
    encode_pair,
    enumerate_plans,
    execute,
    expected_improvement,
    geometric_mean,
    headroom,
    latent_dim,
    median,
    run_search,
)

__all__ = [
    "Catalog",
    "HeadroomError",
    "Statistics",
    "canonical_sql",
    "count_oracle",
    "decode_latent",
    "default_plan",
    "encode_pair",
    "enumerate_plans",
    "execute",
    "expected_improvement",
    "geometric_mean",
    "headroom",
    "latent_dim",
    "median",
    "run_search",
]
