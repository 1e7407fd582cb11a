"""Smoke tests for the python bindings over the main operations."""

import math

import pytest

try:
    import topiclabel as tl
except ImportError:  # pragma: no cover
    import _topiclabel as tl


def test_version():
    assert tl.__version__ == "0.1.0"


def test_embedding_table_roundtrip(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("cat 1.0 0.0\ndog 0.0 1.0\n")
    table = tl.EmbeddingTable.load(str(path), 2)
    assert len(table) == 2
    assert table.dimension == 2
    assert table.lookup("cat") == [1.0, 0.0]
    assert table.lookup("zzz") is None
    assert "dog" in table

    mean, found = table.mean_pool(["cat", "dog"])
    assert found == 2
    assert mean == [0.5, 0.5]

    with pytest.raises(Exception):
        table.mean_pool([])


def test_tokenize():
    assert tl.tokenize("The Cat, sat!") == ["the", "cat", "sat"]


def test_feature_config_and_build_input():
    config = tl.FeatureConfig.parse("topic+caption+vgg")
    assert config.input_dim() == 1600
    assert tl.FeatureConfig.parse("topic+vgg").input_dim() == 1300
    assert tl.FeatureConfig.parse("topic+caption").input_dim() == 600

    vec = tl.build_input([1.0, 2.0], [3.0, 4.0], [5.0], config)
    assert vec.values == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert vec.visual_offset == 4
    assert len(vec) == 5


def test_featurize_pair():
    table = tl.EmbeddingTable(2)
    table.insert("sun", [1.0, 0.0])
    table.insert("sky", [0.0, 1.0])
    topic = tl.Topic("t1", ["sun"])
    image = tl.ImageCandidate("i1", caption_tokens=["sky"], visual=[0.5], rating=2.0)
    vec = tl.featurize_pair(topic, image, table, tl.FeatureConfig(True, True))
    assert vec.values == [1.0, 0.0, 0.0, 1.0, 0.5]


def test_relu_and_mae():
    assert tl.relu([-1.0, 0.5]) == [0.0, 0.5]
    assert tl.mae_loss([1.0, 3.0], [0.0, 1.0]) == pytest.approx(1.5)


def test_train_predict_deterministic(tmp_path):
    inputs = [[float(i) / 8.0, 1.0 - float(i) / 8.0, 0.5] for i in range(16)]
    targets = [3.0 * (i % 2) for i in range(16)]

    config = tl.TrainConfig()
    config.epochs = 5
    config.batch_size = 4
    config.dropout_rate = 0.0
    config.seed = 3

    model_a = tl.init_model(3, 7, hidden_sizes=[6, 4])
    model_b = tl.init_model(3, 7, hidden_sizes=[6, 4])
    history_a = tl.train(model_a, inputs, targets, config)
    history_b = tl.train(model_b, inputs, targets, config)
    assert len(history_a) == 5
    assert history_a == history_b
    assert tl.predict(model_a, inputs[0]) == tl.predict(model_b, inputs[0])

    path = tmp_path / "model.bin"
    tl.save_model(model_a, str(path))
    loaded = tl.load_model(str(path))
    assert loaded.layer_shapes == model_a.layer_shapes
    assert tl.predict(loaded, inputs[1]) == tl.predict(model_a, inputs[1])


def test_model_shapes():
    model = tl.init_model(1600, 1)
    assert model.layer_shapes == [(1600, 256), (256, 128), (128, 64), (64, 32), (32, 1)]


def test_metrics():
    assert tl.dcg_at_k([3.0], 1) == pytest.approx(3.0)
    assert tl.ndcg_at_k([0.0, 3.0], 2) == pytest.approx(1.8927892607143724 / 3.0)
    assert tl.ndcg_at_k([3.0, 1.0], 2) == pytest.approx(1.0)
    assert tl.top1_average_rating([[2.0, 1.0], [1.0, 3.0]]) == pytest.approx(1.5)

    t, p, df = tl.paired_t_test([2.0, 1.5, 2.5, 1.0, 2.2], [1.5, 1.2, 2.0, 1.3, 1.7])
    assert t == pytest.approx(1.936491673104, rel=1e-9)
    assert p == pytest.approx(0.124879825743, rel=1e-6)
    assert df == 4


def test_pagerank_symmetric_pair():
    scores, converged, _ = tl.personalized_pagerank([[0.0, 1.0], [1.0, 0.0]])
    assert converged
    assert scores[0] == pytest.approx(0.5, abs=1e-9)
    assert scores[1] == pytest.approx(0.5, abs=1e-9)
    assert sum(scores) == pytest.approx(1.0, abs=1e-6)


def test_local_ppr_rank():
    table = tl.EmbeddingTable(2)
    table.insert("red", [1.0, 0.0])
    table.insert("blue", [0.0, 1.0])
    topic = tl.Topic("t", ["red"])
    candidates = [
        tl.ImageCandidate("a", ["red"], [1.0, 0.0], 2.0),
        tl.ImageCandidate("b", ["blue"], [0.0, 1.0], 1.0),
    ]
    ids, gold = tl.local_ppr_rank(topic, candidates, table)
    assert sorted(ids) == ["a", "b"]
    assert len(gold) == 2


def test_kfold_split():
    ids = ["t%03d" % i for i in range(300)]
    folds = tl.kfold_split(ids, 5, 42)
    assert len(folds) == 5
    tested = set()
    for index, train, test in folds:
        assert len(train) == 240
        assert len(test) == 60
        assert not set(train) & set(test)
        tested.update(test)
    assert len(tested) == 300


def test_score_pair():
    table = tl.EmbeddingTable(2)
    table.insert("sun", [1.0, 0.0])
    model = tl.init_model(5, 11, hidden_sizes=[4])
    model.feature_config = tl.FeatureConfig(True, True)

    a = tl.score_pair(model, table, ["sun"], "sun rise", [0.3])
    b = tl.score_pair(model, table, ["sun"], "sun rise", [0.3])
    assert a == b
    assert math.isfinite(a)
