"""Model zoo: synopsis and screenplay TP classifiers, interaction features,
inference rules, posterior traces, and the end-to-end composition."""

from .end2end import end_to_end, predict_screenplay_trace, predict_synopsis_trace
from .entities import movie_entity_tokens, sentence_token_matrices
from .inference import infer_scene_tps, infer_synopsis_tps, neighborhood
from .interaction import (
    InteractionSide,
    batched_interaction,
    context_windows,
    interaction,
    window_average_matrix,
)
from .screenplay import (
    SCREENPLAY_VARIANTS,
    ScreenplayModel,
    ScreenplayModelConfig,
    forward_screenplay,
)
from .synopsis import SYNOPSIS_VARIANTS, SynopsisModel, SynopsisModelConfig, forward_synopsis
from .trace import PosteriorTrace, trace_from_csv, trace_to_csv

__all__ = [
    "end_to_end",
    "predict_screenplay_trace",
    "predict_synopsis_trace",
    "movie_entity_tokens",
    "sentence_token_matrices",
    "infer_scene_tps",
    "infer_synopsis_tps",
    "neighborhood",
    "InteractionSide",
    "batched_interaction",
    "context_windows",
    "interaction",
    "window_average_matrix",
    "SCREENPLAY_VARIANTS",
    "ScreenplayModel",
    "ScreenplayModelConfig",
    "forward_screenplay",
    "SYNOPSIS_VARIANTS",
    "SynopsisModel",
    "SynopsisModelConfig",
    "forward_synopsis",
    "PosteriorTrace",
    "trace_from_csv",
    "trace_to_csv",
]
