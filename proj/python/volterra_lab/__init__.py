"""Numerical lab for perturbed sublinear Volterra integro-differential equations."""

from ._core import (
    DomainError,
    Error,
    ForcingTerm,
    InsufficientHorizon,
    MeasureKernel,
    Nonlinearity,
    ValidationError,
    canned_config,
    canned_ids,
    check_phi_props,
    convergence,
    ensemble,
    estimate_L,
    eval_F,
    eval_Phi,
    invert_F,
    parse_config,
    power_envelope_integrable,
    run,
    sample_brownian,
    sample_stable,
    solve,
)


def reproduce(example_id: str) -> dict:
    """Runs a built-in example; ensembles when it declares more than one path."""
    text = canned_config(example_id)
    paths = 1
    for line in text.splitlines():
        key, _, value = line.partition("=")
        if key.strip() == "noise.paths":
            paths = int(value.split("#")[0])
    return ensemble(text) if paths >= 2 else run(text)


__all__ = [name for name in dir() if not name.startswith("_")]
