"""Numerical laboratory for quantum channels.

Builds Kraus-form CPTP maps, their bistochastic and unital extensions, and
optimizes minimal output entropy, maximal output p-norms, and the convex
closure of output entropy, with a harness that certifies the transfer of
those quantities between a channel and its extensions.
"""

from ._kernels import BACKEND
from .channels import (
    Channel,
    ChannelReport,
    apply,
    channel_from_json,
    channel_to_json,
    completely_depolarizing_channel,
    depolarizing_channel,
    identity_channel,
    load_channel,
    named_channel,
    parse_channel_spec,
    random_channel,
    save_channel,
    tensor_channel,
    validate,
    werner_holevo_channel,
)
from .errors import DomainError, QChanLabError, ScaleCapError, ValidationError
from .extensions import (
    ExtensionBundle,
    bistochastic_extension,
    build_extension_bundle,
    embed_input,
    embed_selector,
    load_bundle,
    save_bundle,
    unital_extension,
)
from .linalg import (
    max_abs,
    maximally_mixed,
    nats_to_bits,
    partial_trace,
    projector,
    schatten_norm,
    tensor,
    von_neumann_entropy,
)
from .solvers import (
    DEFAULT_CONFIG,
    Ensemble,
    Optimum,
    OptimizerConfig,
    brute_force_oracle,
    convex_closure,
    max_output_pnorm,
    min_output_entropy,
)
from .weyl import WeylSystem, build_weyl, twirl

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Channel",
    "ChannelReport",
    "DEFAULT_CONFIG",
    "DomainError",
    "Ensemble",
    "ExtensionBundle",
    "Optimum",
    "OptimizerConfig",
    "QChanLabError",
    "ScaleCapError",
    "ValidationError",
    "WeylSystem",
    "apply",
    "bistochastic_extension",
    "brute_force_oracle",
    "build_extension_bundle",
    "build_weyl",
    "channel_from_json",
    "channel_to_json",
    "completely_depolarizing_channel",
    "convex_closure",
    "depolarizing_channel",
    "embed_input",
    "embed_selector",
    "identity_channel",
    "load_bundle",
    "load_channel",
    "max_abs",
    "max_output_pnorm",
    "maximally_mixed",
    "min_output_entropy",
    "named_channel",
    "nats_to_bits",
    "parse_channel_spec",
    "partial_trace",
    "projector",
    "random_channel",
    "save_bundle",
    "save_channel",
    "schatten_norm",
    "tensor",
    "tensor_channel",
    "twirl",
    "unital_extension",
    "validate",
    "von_neumann_entropy",
    "werner_holevo_channel",
]
