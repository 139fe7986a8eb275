import math

import numpy as np
import pytest

import dfl_toolkit as dfl

dfl.set_quiet(True)


def test_shortest_path_solve():
    p = dfl.Problem.shortest_path(2)
    assert p.num_vars == 4
    sol, obj, status = p.solve(np.array([1.0, 3.0, 2.0, 1.0]))
    assert status == "optimal"
    assert obj == pytest.approx(2.0)
    np.testing.assert_allclose(sol, [1.0, 0.0, 0.0, 1.0])


def test_knapsack_and_roundtrip_json():
    p = dfl.Problem.knapsack(np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]]), np.array([5.0, 2.0]))
    q = dfl.Problem.from_json(p.to_json())
    c = p.full_cost(np.array([1.0, 4.0, 5.0]))
    sol, obj, _ = p.solve(c)
    assert obj == pytest.approx(q.solve(c)[1])
    assert obj == pytest.approx(-9.0)
    np.testing.assert_allclose(sol, [0.0, 1.0, 1.0])


def test_top1_layer_matches_closed_form():
    p = dfl.Problem.topk(3, 1)
    layer = dfl.DysLayer(p, dfl.DysConfig(rho=2.0, alpha=0.1, max_iters=20000, tol=1e-12, mode="to-convergence"))
    rec = layer.forward(layer.embed(p.full_cost(np.array([3.0, 2.0, 1.0]))))
    np.testing.assert_allclose(rec.output[:3], [0.75, 0.25, 0.0], atol=1e-6)
    np.testing.assert_allclose(dfl.top1_qp_exact(np.array([3.0, 2.0, 1.0]), 2.0), [0.75, 0.25, 0.0])
    g = layer.vjp(rec, np.ones(layer.num_vars))
    assert g.shape == (layer.num_vars,)
    assert np.all(np.isfinite(g))


def test_toy_loss_values():
    p = dfl.Problem.toy1d()
    cfg = dfl.DysConfig(rho=6.0, alpha=0.05, max_iters=200000, tol=1e-12, mode="to-convergence")
    wstar = p.solve(p.full_cost(np.array([4.0])))[0]
    ev = dfl.loss(p, "regret", np.array([4.0]), np.array([-3.0]), wstar, dys=cfg)
    assert ev["value"] == pytest.approx(2.0, abs=1e-6)
    assert ev["grad"][0] == pytest.approx(-2.0 / 3.0, abs=1e-5)


def test_generate_train_evaluate(tmp_path):
    p = dfl.Problem.shortest_path(3)
    data = dfl.generate(p, n=30, seed=1)
    assert len(data) == 30
    assert data.features.shape == (30, 5)
    assert data.costs.shape == (30, p.pred_dim)
    assert np.all(data.costs >= 0.5)
    path = str(tmp_path / "sp.dataset")
    data.save(path)
    back = dfl.load_dataset(path)
    np.testing.assert_array_equal(back.costs, data.costs)

    model = dfl.LinearModel.zeros(p.pred_dim, 5)
    trained, epochs, calls = dfl.train(model, data, loss="mse", epochs=3)
    assert len(epochs) == 3
    assert calls == 0
    r = dfl.evaluate_regret(trained, data)
    assert math.isfinite(r) and r >= 0.0


def test_harness_wrappers():
    csv = dfl.illustrate_1d(points=5)
    assert csv.startswith("# config=")
    rows = dfl.simulate_top1(m_list=[5], mu_list=[0.5, 2.0], trials=2)
    assert len(rows) == 2
    assert rows[0]["distance"] < 1e-6
    assert rows[1]["distance"] > 0.0
    demo = dfl.knapsack_demo(epochs=3)
    assert len(demo.strip().splitlines()) > 3
