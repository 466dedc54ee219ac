"""Latent-spectrogram vocoder toolkit.

Thin Python surface over the native core. Arrays are float32 numpy arrays;
spectral features are laid out as [..., banks, frames].
"""

from lsevoc._lsevoc import (
    ConfigError,
    DataError,
    DivergenceError,
    DomainError,
    Error,
    NormStats,
    ShapeError,
    SpectralConfig,
    StaleCacheError,
    UsageError,
    auc,
    frame_count,
    hz_to_mel,
    linear_centers,
    linear_filterbank,
    log_linear,
    log_magnitude,
    log_mel,
    mel_centers,
    mel_filterbank,
    mel_to_hz,
    mix_seed,
    read_wav,
    resolved_config,
    run,
    score_wav,
    write_wav,
)

__version__ = "0.1.0"


def config(*sets):
    """Resolved configuration as a dict, with optional ``section.key=value`` overrides."""
    import json

    return json.loads(resolved_config(list(sets)))


def main(argv=None):
    import sys

    code, out, err = run(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
