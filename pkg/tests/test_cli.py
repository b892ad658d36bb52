import json
from fractions import Fraction

import pytest

from mwisr import cli, corpus, preprocess
from mwisr.instance import digest, from_json, to_json


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip_timings(obj):
    if isinstance(obj, dict):
        return {k: _strip_timings(v) for k, v in obj.items() if k != "timings" and not k.endswith("_s")}
    if isinstance(obj, list):
        return [_strip_timings(v) for v in obj]
    return obj


def _write(tmp_path, inst, name="inst.json"):
    p = tmp_path / name
    p.write_text(to_json(inst))
    return str(p)


@pytest.mark.parametrize("kind,extra", [
    ("uniform", []),
    ("delta-large", ["--delta", "1/4"]),
    ("same-scale", ["--delta", "1/2", "--K", "3"]),
    ("adversarial-stripes", []),
])
def test_gen_is_byte_identical(tmp_path, capsys, kind, extra):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        code, _, _ = _run(["gen", kind, "--n", "8", "--N", "16", "--seed", "11", *extra, "--out", str(p)], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert from_json(a.read_text()).n == 8


def test_gen_kind_predicates():
    d = corpus.delta_large(10, 16, Fraction(1, 4), seed=3)
    assert all(max(r.width, r.height) > 4 for r in d.rects)
    s = corpus.same_scale(10, 16, 3, Fraction(1, 2), seed=3)
    assert all(3 <= max(r.width, r.height) <= 6 for r in s.rects)
    a = corpus.adversarial_stripes(10, 16, seed=3)
    assert not preprocess.is_well_distributed(a).ok
    assert corpus.uniform(0, 16, seed=1).n == 0


def test_gen_bad_request_is_precondition(capsys):
    code, _, err = _run(["gen", "delta-large", "--n", "3", "--N", "16", "--seed", "1"], capsys)
    assert code == cli.EXIT_PRECONDITION and "delta" in err


def test_solve_report_deterministic_and_exact(tmp_path, capsys):
    path = _write(tmp_path, corpus.uniform(7, 12, seed=5))
    reports = []
    for _ in range(2):
        code, out, _ = _run(["solve", path, "--families", "RECT_CARVE", "--seed", "5"], capsys)
        assert code == 0
        reports.append(json.loads(out))
    assert _strip_timings(reports[0]) == _strip_timings(reports[1])
    rep = reports[0]
    assert rep["ratio"] == "1"
    assert rep["verify"]["ok"] and rep["verify"]["original_coords_ok"]
    assert rep["digest"] == digest(from_json(open(path).read()))
    assert rep["seeds"]["seed"] == 5 and "version" in rep and "report_version" in rep


def test_solve_straight_never_beats_oracle(tmp_path, capsys):
    for seed in range(5):
        path = _write(tmp_path, corpus.uniform(6, 12, seed=seed), f"s{seed}.json")
        code, out, _ = _run(["solve", path, "--families", "STRAIGHT_CUT", "--k", "8"], capsys)
        assert code == 0
        assert Fraction(json.loads(out)["ratio"]) <= 1


def test_solve_tree_and_svg(tmp_path, capsys):
    path = _write(tmp_path, corpus.uniform(5, 10, seed=2))
    svg = tmp_path / "o.svg"
    code, out, _ = _run(["solve", path, "--tree", "--svg", str(svg)], capsys)
    assert code == 0
    assert "cut_tree" in json.loads(out)["solution"]
    assert svg.read_text().startswith("<svg")


def test_validate_passes(tmp_path, capsys):
    path = _write(tmp_path, corpus.uniform(6, 12, seed=9))
    code, out, _ = _run(["validate", path, "--lemmas", "stretch,normalize"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["exit_code"] == 0
    assert rep["lemmas"]["stretch"]["ok"] and rep["lemmas"]["normalize"]["ok"]


def test_validate_precondition_exit(tmp_path, capsys):
    from mwisr.geom import Rect
    from mwisr.instance import Instance
    overlapping = Instance((Rect(0, 0, 0, 10, 3, 2), Rect(1, 5, 0, 8, 12, 3)), 16)
    path = _write(tmp_path, overlapping)
    for lemma in ("partition", "cut"):
        code, out, _ = _run(["validate", path, "--lemmas", lemma, "--delta", "1/4"], capsys)
        verdict = json.loads(out)["lemmas"][lemma]
        assert code == cli.EXIT_PRECONDITION and verdict["ok"] is None


def test_validate_failure_exit(tmp_path, capsys, monkeypatch):
    # exit-code plumbing: a failing check maps to 2 and outranks a precondition
    monkeypatch.setitem(cli._VALIDATORS, "stretch", lambda inst, args: {"ok": False})
    path = _write(tmp_path, corpus.uniform(4, 8, seed=1))
    code, out, _ = _run(["validate", path, "--lemmas", "cut,stretch", "--delta", "1/4"], capsys)
    assert code == cli.EXIT_VALIDATION
    assert json.loads(out)["exit_code"] == cli.EXIT_VALIDATION


def test_validate_largerect_on_delta_large(tmp_path, capsys):
    path = _write(tmp_path, corpus.delta_large(6, 16, Fraction(1, 4), seed=21))
    code, out, _ = _run(["validate", path, "--lemmas", "largerect"], capsys)
    rep = json.loads(out)["lemmas"]["largerect"]
    assert code == 0 and rep["ok"], rep["violations"]


@pytest.mark.parametrize("text,needle", [
    ('{"N": 4, "rects": [{"id": 0, "x1": 0, "y1": 0, "x2": 5, "y2": 1, "weight": 1}]}', "line"),
    ("{not json", ""),
])
def test_parse_errors(tmp_path, capsys, text, needle):
    p = tmp_path / "bad.json"
    p.write_text(text)
    code, _, err = _run(["solve", str(p)], capsys)
    assert code == cli.EXIT_PARSE
    assert needle in err


def test_usage_errors_share_parse_code(tmp_path, capsys):
    path = _write(tmp_path, corpus.uniform(3, 8, seed=1))
    with pytest.raises(SystemExit) as e:
        cli.main(["solve", path, "--k", "2"])
    assert e.value.code == cli.EXIT_PARSE
    with pytest.raises(SystemExit) as e:
        cli.main(["solve", path, "--families", "NOPE"])
    assert e.value.code == cli.EXIT_PARSE
    capsys.readouterr()


def test_compare(tmp_path, capsys):
    paths = [_write(tmp_path, corpus.uniform(5, 10, seed=s), f"c{s}.json") for s in range(2)]
    code, out, _ = _run(["compare", *paths], capsys)
    rep = json.loads(out)
    assert code == 0 and len(rep["rows"]) == 2
    for row in rep["rows"]:
        assert row["carve"] == row["oracle"]
        assert row["greedy"] <= row["oracle"] and row["straight"] <= row["oracle"]


@pytest.mark.parametrize("layer", ["none", "partition", "largerect"])
def test_render(tmp_path, capsys, layer):
    inst = corpus.delta_large(5, 16, Fraction(1, 4), seed=8, disjoint=True)
    path = _write(tmp_path, inst)
    svg = tmp_path / "r.svg"
    code, _, _ = _run(["render", path, "--svg", str(svg), "--layer", layer, "--delta", "1/4"], capsys)
    assert code == 0
    text = svg.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert text.count("<rect") >= inst.n + 1


def test_render_largerect_on_overlapping_input(tmp_path, capsys):
    inst = corpus.delta_large(8, 16, Fraction(1, 4), seed=3)
    assert qptas_overlaps(inst)
    path = _write(tmp_path, inst)
    svg = tmp_path / "o.svg"
    code, _, _ = _run(["render", path, "--svg", str(svg), "--layer", "largerect", "--delta", "1/4"], capsys)
    assert code == 0 and svg.read_text().startswith("<svg")
    code, _, _ = _run(["render", path, "--svg", str(svg), "--layer", "largerect", "--delta", "1/4",
                       "--oracle-cap", "4"], capsys)
    assert code == cli.EXIT_PRECONDITION


def qptas_overlaps(inst):
    from mwisr.qptas import overlapping_pairs
    return bool(overlapping_pairs(inst.rects))
