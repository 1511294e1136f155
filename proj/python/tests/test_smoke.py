import math
import os
import subprocess

import pytest

import fimkit

SRC = "def f(a, b):\n    if a > b:\n        return a - b\n    return b * 2\n"


def test_mask_one_is_deterministic_and_inside_the_text():
    a = fimkit.mask_one(SRC, "python", seed=3, stream="m.py", index=0)
    b = fimkit.mask_one(SRC, "python", seed=3, stream="m.py", index=0)
    assert a == b
    assert 0 <= a["start"] < a["end"] <= len(SRC.encode())
    assert a["middle"] == SRC.encode()[a["start"]:a["end"]].decode()
    assert a["strategy"] in {"single_node", "aligned_span", "rand_char"}


def test_broken_source_falls_back():
    m = fimkit.mask_one("def f(:\n  return ((\n", "python", seed=1)
    assert m["strategy"] == "rand_char"
    assert m["fallback"] == "unparsed"


def test_generate_round_trips(tmp_path):
    (tmp_path / "a.py").write_text(SRC * 5)
    (tmp_path / "b.rs").write_text("fn f(x: i32) -> i32 {\n    x + 1\n}\n" * 5)
    records, stats = fimkit.generate(tmp_path, seed=7, fim_rate=1.0, context_budget=64)
    assert records and stats["records"] == len(records)
    for r in records:
        assert r["kind"] == "fim"
        assert r["text"].endswith("[EOT]")
    again, _ = fimkit.generate(tmp_path, seed=7, fim_rate=1.0, context_budget=64, workers=3)
    assert again == records


def test_benchmark_from_repository(tmp_path):
    env = dict(os.environ, GIT_AUTHOR_DATE="2024-01-01T00:00:00Z", GIT_COMMITTER_DATE="2024-01-01T00:00:00Z")

    def git(*args):
        subprocess.run(["git", "-c", "user.name=t", "-c", "user.email=t@example.com", *args],
                       cwd=tmp_path, env=env, check=True, capture_output=True)

    git("init", "-q")
    (tmp_path / "a.py").write_text("a = 1\nc = 3\n")
    git("add", "-A")
    git("commit", "-q", "-m", "one")
    (tmp_path / "a.py").write_text("a = 1\nb = 2\nc = 3\n")
    git("commit", "-q", "-am", "two")
    (tmp_path / "a.py").write_text("a = 1\nb = 20\nc = 3\n")
    git("commit", "-q", "-am", "three")

    examples, stats = fimkit.build_benchmark(tmp_path)
    splits = sorted(e["split"] for e in examples)
    assert splits == ["Add", "Edit"]
    edit = next(e for e in examples if e["split"] == "Edit")
    assert (edit["prefix"], edit["original"], edit["middle"], edit["suffix"]) == ("a = 1\n", "b = 2\n", "b = 20\n", "c = 3\n")


def test_char_ppl_closed_forms():
    assert fimkit.char_ppl("ab", [("ab", math.log(0.5))]) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert fimkit.char_ppl("abcdef", [("abc", -1.0), ("def", -2.0)]) == pytest.approx(math.exp(0.5), abs=1e-12)
    with pytest.raises(fimkit.CoverageMismatch):
        fimkit.char_ppl("abc", [("ab", -1.0)])
    with pytest.raises(fimkit.EmptyMiddle):
        fimkit.char_ppl("", [])


def test_ngram_and_prompt_helpers():
    scores = fimkit.ngram_score("abc", "abcabcabc", order=2, k=0.5)
    assert [t for t, _ in scores] == ["a", "b", "c"]
    assert all(lp <= 0 for _, lp in scores)
    assert fimkit.render_l2r_prompt("a", "c") == "c\n\na"
    assert fimkit.line_diff("a\nb\nc\n", "a\nb\nX\nc\n") == [("insert", (2, 2), (2, 3))]
    assert fimkit.detect_language("x.rs") == "rust"
