"""FIM training data, commit-derived FIM benchmarks and character-level perplexity."""

import json
import os
from pathlib import Path

from . import _core
from ._core import (
    CoverageMismatch,
    EmptyMiddle,
    InvalidUtf8,
    char_ppl,
    detect_language,
    line_diff,
    mask_one,
    ngram_score,
    render_l2r_prompt,
)

_bundled = Path(__file__).with_name("grammars")
if "FIMKIT_GRAMMAR_DIR" not in os.environ and _bundled.is_dir():
    _core.set_grammar_dir(str(_bundled))

__all__ = [
    "CoverageMismatch",
    "EmptyMiddle",
    "InvalidUtf8",
    "build_benchmark",
    "char_ppl",
    "detect_language",
    "generate",
    "line_diff",
    "mask_one",
    "ngram_score",
    "render_l2r_prompt",
]


def generate(corpus, **config):
    """Training records for a directory or JSONL corpus, plus run statistics."""
    lines, stats = _core.generate(str(corpus), **config)
    return [json.loads(line) for line in lines], json.loads(stats)


def build_benchmark(repos, langs=(), **filters):
    """Add/Edit examples from the history of a repository (or a directory of them)."""
    lines, stats = _core.build_benchmark(str(repos), langs=list(langs), **filters)
    return [json.loads(line) for line in lines], json.loads(stats)
