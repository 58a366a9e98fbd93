"""Barwise compression and dynamic-programming segmentation of music."""

import json

from ._barseg import (
    BarsegError,
    DegenerateError,
    DivergenceError,
    FormatError,
    InvalidArgument,
    StageError,
    align_to_downbeats,
    barwise_tf,
    compute_ck8max,
    cosine_autosimilarity,
    dp_segment,
    feature,
    hit_rate,
    kernel,
    load_annotations,
    load_wav,
    nmf,
    pca,
    penalty,
    segment_cost,
    segment_score,
    train_autoencoder,
)
from . import _barseg

__all__ = [
    "BarsegError",
    "DegenerateError",
    "DivergenceError",
    "FormatError",
    "InvalidArgument",
    "StageError",
    "align_to_downbeats",
    "barwise_tf",
    "compute_ck8max",
    "cosine_autosimilarity",
    "dp_segment",
    "feature",
    "hit_rate",
    "kernel",
    "load_annotations",
    "load_wav",
    "nmf",
    "pca",
    "penalty",
    "run_song",
    "segment_cost",
    "segment_score",
    "train_autoencoder",
]


def run_song(audio, downbeats, annotations=None, **options):
    """Run the full pipeline on one song and return the result as a dict.

    Options mirror the command line: feature, compressor, d_c, subdivision,
    max_segment, tolerances, seed, ae_max_epochs and out_dir.
    """
    audio = str(audio)
    downbeats = str(downbeats)
    if annotations is not None:
        annotations = str(annotations)
    if options.get("out_dir") is not None:
        options["out_dir"] = str(options["out_dir"])
    return json.loads(_barseg.run_song_json(audio, downbeats, annotations, **options))
