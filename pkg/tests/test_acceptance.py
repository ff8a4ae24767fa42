"""Acceptance suite: one test per release criterion, each printing a PASS
line with the measured numbers (run with ``pytest -s tests/test_acceptance.py``
to see them).

Criteria:
  1. analytic gradients of every parameter of the full objective match
     central finite differences (h=1e-5, rel < 1e-4, abs 1e-6 near zero),
     on a 12-node 2-view graph, in under 30 s
  2. modularity matrix identities on 100 random graphs (n <= 50)
  3. matrix-form GCN layer and structure decoder match per-node/per-pair
     oracles (1e-10 / 1e-12)
  4. aggregation identities (one-hot, simplex rejection, concat slicing)
  5. end-to-end detection on the default recipe (seed 42, 300 epochs):
     final loss < 50% of epoch 1, AUC >= 0.75, precision@15 >= 0.4, < 5 min
  6. generate -> train -> score is byte-identical across runs
  7. lambda at the endpoints fully silences the other reconstruction term
  8. exact-pair AUC equals brute-force pair counting on 50 random vectors
"""

import time

import numpy as np
import pytest

from mvgad.autodiff import Tensor
from mvgad.cli import main
from mvgad.decoders import LossConfig, joint_loss, structure_decode
from mvgad.encoders import gcn_layer
from mvgad.evaluation import auc_roc, evaluate, precision_at_k
from mvgad.fusion import AggregationWeights, aggregate_concat, aggregate_weighted
from mvgad.graph import MultiViewGraph, modularity_matrix, normalize_adjacency
from mvgad.synthetic import GenConfig, generate
from mvgad.training import (
    GraphTensors,
    ModelDims,
    TrainConfig,
    _loss_terms,
    forward,
    init_params,
    train,
    score,
)

from oracles import (
    assert_grads_close,
    auc_pairs,
    finite_difference_grad,
    gcn_layer_loops,
    modularity_loops,
    random_graph,
    structure_decode_pairs,
)


def test_criterion_1_full_objective_gradients():
    # The seeds pin a generic sample point: zero-initialized biases plus
    # fully-dead relu rows would put pre-activations exactly at the kink,
    # where the subgradient convention (0) legitimately disagrees with
    # central differences.
    started = time.monotonic()
    g = generate(
        GenConfig(
            n=12,
            communities=3,
            p_in=0.6,
            p_out=0.1,
            view_dims=(3, 4),
            anomaly_fraction=0.0,
            seed=5,
        )
    )
    cfg = TrainConfig(
        lam=0.4,
        gamma=0.2,
        seed=14,
        view_hidden=(5, 4),
        ae_hidden=(8, 4),
        community_hidden=(5, 4),
    )
    params = init_params(ModelDims.for_graph(g, cfg), cfg.seed)
    gt = GraphTensors.from_graph(g)

    def total_loss():
        structure, attribute, ae = _loss_terms(gt, forward(gt, params, cfg), cfg)
        return structure + attribute + ae

    total_loss().backward()
    checked = 0
    for name, p in params.named_parameters().items():
        numeric = finite_difference_grad(lambda: total_loss().item(), p.data, h=1e-5)
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        assert_grads_close(analytic, numeric, rel_tol=1e-4, abs_tol=1e-6, label=name)
        checked += p.data.size
    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s"
    print(
        f"PASS criterion 1: {checked} parameter entries match finite differences "
        f"(rel<1e-4) in {elapsed:.1f}s"
    )


def test_criterion_2_modularity_identities():
    rng = np.random.default_rng(1002)
    done = 0
    while done < 100:
        adj = random_graph(rng, int(rng.integers(2, 51)), p=float(rng.uniform(0.1, 0.9)))
        if adj.sum() == 0:
            continue
        done += 1
        b = modularity_matrix(adj)
        assert np.abs(b - b.T).max() < 1e-12
        assert np.abs(b.sum(axis=1)).max() < 1e-9
        np.testing.assert_array_equal(b, modularity_loops(adj))
    print("PASS criterion 2: modularity identities hold on 100 random graphs")


def test_criterion_3_forward_pass_oracle_parity():
    rng = np.random.default_rng(1003)
    for _ in range(25):
        n = int(rng.integers(1, 9))
        a_hat = normalize_adjacency(random_graph(rng, n))
        x = rng.standard_normal((n, int(rng.integers(1, 5))))
        w = rng.standard_normal((x.shape[1], int(rng.integers(1, 5))))
        got = gcn_layer(Tensor(a_hat), Tensor(x), Tensor(w)).data
        assert np.abs(got - gcn_layer_loops(a_hat, x, w)).max() < 1e-10
    for _ in range(25):
        q = rng.standard_normal((int(rng.integers(1, 9)), int(rng.integers(1, 6))))
        got = structure_decode(Tensor(q)).data
        assert np.abs(got - structure_decode_pairs(q)).max() < 1e-12
    print("PASS criterion 3: GCN layer and structure decoder match loop oracles")


def test_criterion_4_aggregation_identities():
    rng = np.random.default_rng(1004)
    us = [Tensor(rng.standard_normal((6, 4))) for _ in range(3)]
    community = Tensor(rng.standard_normal((6, 7)))

    for j in range(3):
        alphas = tuple(1.0 if k == j else 0.0 for k in range(3))
        fused = aggregate_weighted(us, community, AggregationWeights(alphas, 0.0))
        assert np.array_equal(fused.data, us[j].data), f"one-hot view {j}"

    with pytest.raises(ValueError):
        aggregate_weighted(
            us, community, AggregationWeights((0.5, 0.5, 0.1), 0.0)
        )
    with pytest.raises(ValueError):
        aggregate_weighted(
            us, community, AggregationWeights((1.5, -0.25, -0.25), 0.0)
        )

    fused = aggregate_concat(us, community).data
    for k in range(3):
        assert np.array_equal(fused[:, 4 * k : 4 * (k + 1)], us[k].data)
    assert np.array_equal(fused[:, 12:], community.data)
    print("PASS criterion 4: one-hot identity, simplex rejection, concat slicing")


def test_criterion_5_end_to_end_detection():
    started = time.monotonic()
    g = generate(GenConfig())  # default desk-scale recipe, seed 42
    assert g.n == 500
    assert int((g.labels != "normal").sum()) == 15
    cfg = TrainConfig()  # 300 epochs, seed 42
    params, history = train(g, cfg)
    report = score(g, params, cfg)
    result = evaluate(report.scores, g.labels, ks=[15])
    elapsed = time.monotonic() - started

    ratio = history.total[-1] / history.total[0]
    assert ratio < 0.5, f"loss ratio {ratio:.3f}"
    assert result.auc_roc >= 0.75, f"AUC {result.auc_roc:.3f}"
    assert result.precision_at_k[15] >= 0.4, f"P@15 {result.precision_at_k[15]:.2f}"
    assert elapsed < 300.0, f"end-to-end took {elapsed:.0f}s"
    print(
        f"PASS criterion 5: loss {history.total[0]:.0f}->{history.total[-1]:.0f} "
        f"(ratio {ratio:.3f}), AUC {result.auc_roc:.3f}, "
        f"P@15 {result.precision_at_k[15]:.2f}, {elapsed:.0f}s"
    )


def test_criterion_6_pipeline_determinism(tmp_path):
    config = tmp_path / "config.toml"
    config.write_text(
        "[generate]\nn = 120\ncommunities = 4\np_in = 0.3\np_out = 0.02\n"
        "view_dims = [6, 5]\nanomaly_fraction = 0.025\nclique_size = 3\nseed = 42\n"
        "[train]\nepochs = 60\nseed = 42\n"
    )
    digests = []
    for tag in ("a", "b"):
        ds = tmp_path / f"ds_{tag}"
        ckpt = tmp_path / f"model_{tag}.ckpt"
        scores = tmp_path / f"scores_{tag}.csv"
        assert main(["generate", "--config", str(config), "--out", str(ds)]) == 0
        assert main(
            ["train", "--data", str(ds), "--config", str(config), "--out", str(ckpt)]
        ) == 0
        assert main(
            ["score", "--data", str(ds), "--ckpt", str(ckpt), "--out", str(scores)]
        ) == 0
        digests.append(scores.read_bytes())
    assert digests[0] == digests[1]
    print("PASS criterion 6: generate->train->score is byte-identical across runs")


def test_criterion_7_lambda_sensitivity():
    rng = np.random.default_rng(1007)
    adjacency = Tensor(random_graph(rng, 6, p=0.5))
    attrs = Tensor(rng.standard_normal((6, 4)))

    structure_a = Tensor(rng.random((6, 6)))
    structure_b = Tensor(rng.random((6, 6)))
    at_one = LossConfig(lam=1.0)
    assert (
        joint_loss(adjacency, structure_a, attrs, attrs, at_one).item()
        == joint_loss(adjacency, structure_b, attrs, attrs, at_one).item()
    )

    attr_a = Tensor(rng.standard_normal((6, 4)))
    attr_b = Tensor(rng.standard_normal((6, 4)))
    at_zero = LossConfig(lam=0.0)
    assert (
        joint_loss(adjacency, structure_a, attrs, attr_a, at_zero).item()
        == joint_loss(adjacency, structure_a, attrs, attr_b, at_zero).item()
    )
    print("PASS criterion 7: lambda endpoints silence the other term exactly")


def test_criterion_8_auc_pair_counting_oracle():
    rng = np.random.default_rng(1008)
    for _ in range(50):
        n = int(rng.integers(2, 201))
        labels = np.zeros(n, dtype=np.int64)
        labels[: max(1, int(rng.integers(1, n)))] = 1
        rng.shuffle(labels)
        if labels.sum() == n:
            labels[0] = 0
        scores = np.round(rng.random(n), 2)  # coarse grid forces plenty of ties
        assert auc_roc(scores, labels) == auc_pairs(scores, labels)
    print("PASS criterion 8: exact AUC equals brute-force pair counting, 50 vectors")


def test_graph_validation_helper():
    # the acceptance recipe relies on generated graphs being valid by
    # construction; double-check one explicitly
    g = generate(GenConfig(n=60, communities=3, p_in=0.4, p_out=0.02, view_dims=(4,)))
    MultiViewGraph(g.adjacency, g.views, g.labels)
    assert precision_at_k(np.arange(g.n)[::-1], (g.labels != "normal").astype(int), 5) >= 0.0
