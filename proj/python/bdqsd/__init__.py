"""Quasi-stationary analysis of density-dependent birth-and-death chains."""

from ._core import (
    Analysis,
    AssumptionCheck,
    ConfigError,
    Error,
    InvalidModel,
    Landmarks,
    ModelSpec,
    SimEstimate,
    TimeTooLarge,
    git_blob_sha1,
    landmarks,
    run_command,
    simulate,
    validate,
)


def logistic(lam, mu, K):
    return ModelSpec("logistic", {"lam": lam, "mu": mu}, K)


def power_death(a, b, cc, p, K):
    return ModelSpec("power_death", {"a": a, "b": b, "cc": cc, "p": p}, K)


def analyze(spec, oracle=False):
    return Analysis(spec, oracle)
