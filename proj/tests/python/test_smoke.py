import json
import math
import pathlib

import pytest

import pathmark

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"


@pytest.fixture(scope="module")
def index(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    labels = {}
    for model_id, label, text in pathmark.synth_corpus(models=36, seed=3, domains=3):
        (root / f"{model_id}.json").write_text(text)
        labels[model_id] = label
    idx = pathmark.Index(tmp_path_factory.mktemp("index") / "idx", writable=True)
    report = idx.add_directory(root, "ecore")
    return idx, root, labels, report


def test_bm25_term_matches_formula():
    # c_q=1, c_m=2, length equal to avdl, t=10, df=4
    expected = 1 * (0.1 + 1) * 2 / (2 + 0.1) * math.log(11 / 4)
    assert pathmark.bm25_term(1, 2, 5, 5.0, 10, 4) == pytest.approx(expected, abs=1e-12)
    assert pathmark.bm25_term(1, 1, 1, 1.0, 1, 1) == pytest.approx(math.log(2) * 1.1 / 1.1, abs=1e-12)


def test_parse_and_paths_of_fixture():
    data = (FIXTURES / "running_query.json").read_bytes()
    model = pathmark.parse_model(data, "running_query.json")
    assert model["modelType"] == "uml"
    paths = pathmark.extract_paths(data, "running_query.json")
    assert paths and all(n > 0 for n in paths.values())
    raw = pathmark.extract_paths(data, "running_query.json", normalize=False)
    assert raw['"Wait" -name-> State'] == 1
    assert '"wait" -name-> State' in paths
    assert pathmark.normalize_label("waitingToPickUp") == ["wait", "pick"]


def test_malformed_model_raises():
    with pytest.raises(ValueError):
        pathmark.parse_model(b'{"modelType": "x", "objects": [', "bad.json")


def test_index_search_stats_and_model(index):
    idx, root, labels, report = index
    assert report["indexed"] == len(labels)
    assert idx.stats()["model_types"]["ecore"]["t"] == len(labels)
    target = sorted(labels)[0]
    hits = idx.search((root / f"{target}.json").read_bytes(), "ecore", max_results=5, explain=True)
    assert len(hits["results"]) <= 5
    top = hits["results"][0]
    assert top["id"].endswith(target)
    assert sum(p["contribution"] for p in top["matched_paths"]) == pytest.approx(top["score"], rel=1e-9)
    body, meta = idx.model(top["id"])
    assert json.loads(body)["modelType"] == "ecore"
    assert meta["X-Model-Type"] == "ecore"
    with pytest.raises(KeyError):
        idx.search(b'{"modelType":"x","objects":[]}', "nope")
    assert idx.audit("ecore", [top["id"]]) == []


def test_classify(index):
    idx, root, labels, _ = index
    by_index_id = {}
    for r in idx.search((root / f"{sorted(labels)[0]}.json").read_bytes(), "ecore", max_results=200)["results"]:
        stem = r["id"].split("-", 1)[1]
        by_index_id[r["id"]] = labels[stem]
    query = sorted(labels)[1]
    result = idx.classify((root / f"{query}.json").read_bytes(), "ecore", by_index_id, k=3)
    assert result["label"] == labels[query]
