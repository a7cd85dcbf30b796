"""Decentralized multi-agent exploration: grid MARL training and deployment."""

from ._core import (
    CheckpointMismatch,
    ConfigError,
    DeploymentConfig,
    EnvConfig,
    Environment,
    GenerationFailed,
    RewardConfig,
    RunConfig,
    TooManyAgents,
    TrainConfig,
    arena_from_text,
    arena_to_text,
    controller_step,
    default_config,
    deploy,
    evaluate,
    gen_env,
    generate_arena,
    jaccard_aggregate,
    jaccard_pair,
    load_config,
    replay,
    sample_initial_positions,
    save_config,
    setup_poses,
    train,
)

__all__ = [
    "CheckpointMismatch",
    "ConfigError",
    "DeploymentConfig",
    "EnvConfig",
    "Environment",
    "GenerationFailed",
    "RewardConfig",
    "RunConfig",
    "TooManyAgents",
    "TrainConfig",
    "arena_from_text",
    "arena_to_text",
    "controller_step",
    "default_config",
    "deploy",
    "evaluate",
    "gen_env",
    "generate_arena",
    "jaccard_aggregate",
    "jaccard_pair",
    "load_config",
    "replay",
    "sample_initial_positions",
    "save_config",
    "setup_poses",
    "train",
]

__version__ = "0.1.0"
