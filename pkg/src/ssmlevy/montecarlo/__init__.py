"""Monte Carlo simulation of the Lamperti functionals."""

from .simulate import (
    JumpTable,
    LampertiPath,
    MCEstimate,
    PathConfig,
    esscher_weighted_estimate,
    estimate_fpt_laplace,
    jump_table,
    rivero_moment,
    rivero_reference,
    run_paths,
    sample_jumps,
    sample_sigma_infty,
    simulate_levy_path,
    stable_increments,
    write_paths_csv,
    write_summary,
)

__all__ = [
    "JumpTable",
    "LampertiPath",
    "MCEstimate",
    "PathConfig",
    "esscher_weighted_estimate",
    "estimate_fpt_laplace",
    "jump_table",
    "rivero_moment",
    "rivero_reference",
    "run_paths",
    "sample_jumps",
    "sample_sigma_infty",
    "simulate_levy_path",
    "stable_increments",
    "write_paths_csv",
    "write_summary",
]
