"""Dictionary-driven RNN that reproduces quantized delay dynamics."""

import json as _json

from ._dictrnn import *  # noqa: F401,F403
from ._dictrnn import (
    _cmd_build,
    _cmd_generate,
    _cmd_run,
    _cmd_verify,
    _full_suite,
    _normalize_config,
    load_artifact_manifest as _load_manifest,
)


def config(**overrides):
    """Full experiment config as a dict; unknown keys raise ConfigError."""
    return _json.loads(_normalize_config(_json.dumps(overrides)))


def full_suite(cfg=None, **overrides):
    cfg = dict(cfg or {}, **overrides)
    return _full_suite(_json.dumps(cfg))


def cmd_generate(cfg):
    return _cmd_generate(_json.dumps(cfg))


def cmd_build(cfg):
    return _cmd_build(_json.dumps(cfg))


def cmd_run(cfg):
    return _cmd_run(_json.dumps(cfg))


def cmd_verify(cfg):
    return _cmd_verify(_json.dumps(cfg))


def load_manifest(path):
    return _json.loads(_load_manifest(path))
