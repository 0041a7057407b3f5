"""Tests for approximators, optimizers and Q-functions"""
import numpy as np
import pytest

from app.libs.approx import (
    ContractError,
    Featurizer,
    FitConfig,
    FunctionClass,
    LinearApproximator,
    MlpApproximator,
    NonFiniteError,
    OptimizerName,
    OptimizerState,
    QFunction,
    QMode,
    SerializationError,
    TabularApproximator,
    dumps,
    fit_regression,
    loads,
    optimizer_step,
)
from app.libs.core import FactoredState, RngStream

_FEATURIZER = Featurizer(exo_scale=(1.0,), endo_scale=(0.1,), horizon=3)


def _relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a) + abs(b), 1e-6)


def test_mlp_gradients_match_finite_differences():
    """Analytic gradients agree with central differences on random draws"""
    rng = RngStream(0, "gradcheck")
    step = 1e-5
    worst = 0.0
    for draw in range(100):
        mlp = MlpApproximator(4, 3, hidden=6, rng=rng.child(f"init{draw}"))
        x = rng.normal(size=(5, 4))
        targets = rng.normal(size=(5, 3))
        mask = (rng.random((5, 3)) < 0.7).astype(float)
        _, grads = mlp.loss_and_gradients(x, targets, mask)

        name = ["w1", "b1", "w2", "b2"][draw % 4]
        index = tuple(int(rng.integers(0, n)) for n in mlp.params[name].shape)
        original = mlp.params[name][index]
        mlp.params[name][index] = original + step
        plus, _ = mlp.loss_and_gradients(x, targets, mask)
        mlp.params[name][index] = original - step
        minus, _ = mlp.loss_and_gradients(x, targets, mask)
        mlp.params[name][index] = original

        numeric = (plus - minus) / (2 * step)
        worst = max(worst, _relative_error(grads[name][index], numeric))

    assert worst < 1e-4


def test_adam_first_step_moves_by_learning_rate():
    """The first bias-corrected Adam step has size lr against the gradient"""
    cfg = FitConfig(optimizer=OptimizerName.ADAM, learning_rate=0.01)
    params = {"w": np.array([1.0, -2.0, 0.5])}
    grads = {"w": np.array([3.0, -0.2, 1e-3])}

    updated, state = optimizer_step(params, grads, OptimizerState(), cfg)

    np.testing.assert_allclose(updated["w"], [0.99, -1.99, 0.49], atol=1e-6)
    assert state.t == 1
    np.testing.assert_array_equal(params["w"], [1.0, -2.0, 0.5])


def test_rmsprop_step():
    """RMSprop divides the gradient by the root of its running square"""
    cfg = FitConfig(optimizer=OptimizerName.RMSPROP, learning_rate=0.1)
    params = {"w": np.array([0.0])}
    updated, _ = optimizer_step(params, {"w": np.array([2.0])}, OptimizerState(), cfg)

    expected = -0.1 * 2.0 / (np.sqrt(0.01 * 4.0) + 1e-8)
    np.testing.assert_allclose(updated["w"], [expected])


def test_optimizer_step_contract():
    """Mismatched shapes and non-finite gradients are refused"""
    cfg = FitConfig()
    params = {"w": np.zeros(2)}
    with pytest.raises(ContractError, match="shape"):
        optimizer_step(params, {"w": np.zeros(3)}, OptimizerState(), cfg)
    with pytest.raises(NonFiniteError):
        optimizer_step(params, {"w": np.array([np.nan, 0.0])}, OptimizerState(), cfg)


def test_tabular_fit_averages_targets_per_cell():
    """Each (features, action) cell holds the mean of its targets"""
    table = TabularApproximator(1, 2)
    x = np.array([[0.0], [0.0], [1.0]])
    table.fit(x, np.array([1, 1, 0]), np.array([2.0, 4.0, 5.0]), FitConfig())

    np.testing.assert_array_equal(
        table.predict(x), [[0.0, 3.0], [0.0, 3.0], [5.0, 0.0]]
    )
    np.testing.assert_array_equal(table.predict(np.array([[7.0]])), [[0.0, 0.0]])


def test_linear_fit_recovers_affine_targets():
    """Per-action least squares recovers an affine target up to the ridge"""
    rng = RngStream(1)
    x = rng.normal(size=(200, 2))
    actions = rng.integers(0, 2, size=200)
    targets = np.where(actions == 0, x @ [1.0, -2.0] + 0.5, 3.0 * x[:, 1])
    linear = LinearApproximator(2, 2)
    trace = linear.fit(x, actions, targets, FitConfig())

    assert trace[-1] < 1e-6
    np.testing.assert_allclose(linear.weights[0], [1.0, -2.0, 0.5], atol=1e-4)


def test_mlp_fit_reduces_error():
    """Mini-batch training lowers the error on a smooth target"""
    rng = RngStream(2)
    x = rng.uniform(-1, 1, size=(256, 2))
    actions = rng.integers(0, 2, size=256)
    targets = np.sin(x[:, 0]) + actions * x[:, 1]
    mlp = MlpApproximator(2, 2, hidden=16, rng=rng.child("init"))
    cfg = FitConfig(updates=300, batch_size=32, learning_rate=0.01)
    trace = mlp.fit(x, actions, targets, cfg)

    assert trace[-1] < 0.5 * trace[0]


def test_fit_contract_errors():
    """Empty, misaligned and non-finite pairs are refused"""
    mlp = MlpApproximator(2, 2, hidden=4, rng=RngStream(0))
    with pytest.raises(ContractError, match="empty"):
        mlp.fit(np.zeros((0, 2)), np.zeros(0, dtype=int), np.zeros(0), FitConfig())
    with pytest.raises(ContractError, match="action out of range"):
        mlp.fit(np.zeros((1, 2)), np.array([2]), np.array([1.0]), FitConfig())
    with pytest.raises(NonFiniteError):
        mlp.fit(np.zeros((1, 2)), np.array([0]), np.array([np.inf]), FitConfig())


def test_q_function_is_zero_at_the_horizon():
    """Values at h = H are 0 and steps past it are refused"""
    q = QFunction(FunctionClass.MLP, _FEATURIZER, 2, rng=RngStream(0), hidden=4)
    state = FactoredState(exo=(0.3,), endo=4)

    assert q.predict(state, 3, 1) == 0.0
    assert q.values(np.array([[0.3]]), np.array([[4.0]]), 3).tolist() == [[0.0, 0.0]]
    with pytest.raises(ContractError, match="horizon step 4"):
        q.predict(state, 4, 0)
    with pytest.raises(ContractError, match="action 2"):
        q.predict(state, 0, 2)


def test_shared_q_function_sees_the_step():
    """In shared mode one approximator receives h / H as a feature"""
    q = QFunction(FunctionClass.MLP, _FEATURIZER, 2, QMode.SHARED, RngStream(0), 8)

    assert q.featurizer.n_features == 3
    assert q.slot(0) is q.slot(2)
    x = q.features(np.array([[0.3]]), np.array([[4.0]]), 2)
    np.testing.assert_allclose(x, [[0.3, 0.4, 2 / 3]])


def test_q_function_text_is_lossless():
    """Serialized weights read back bit-identical"""
    q = QFunction(FunctionClass.MLP, _FEATURIZER, 3, rng=RngStream(5), hidden=4)
    restored = QFunction.from_dict(loads(dumps(q.to_dict())))

    exo, endo = np.array([[0.1], [0.7]]), np.array([[2.0], [9.0]])
    for h in range(3):
        np.testing.assert_array_equal(
            restored.values(exo, endo, h), q.values(exo, endo, h)
        )
    assert dumps(restored.to_dict()) == dumps(q.to_dict())


def test_loads_rejects_untagged_documents():
    """Documents without a kind tag are refused"""
    with pytest.raises(SerializationError, match="kind"):
        loads('{"weights": []}')
    with pytest.raises(SerializationError, match="malformed"):
        loads("{not json")
    with pytest.raises(SerializationError):
        dumps({"kind": "x", "value": float("nan")})


def test_fit_regression_fits_the_given_approximator():
    table = TabularApproximator(1, 2)
    x = np.array([[0.0], [1.0]])
    fit_regression(table, x, np.array([0, 1]), np.array([1.5, -2.0]), FitConfig())

    np.testing.assert_array_equal(table.predict(x), [[1.5, 0.0], [0.0, -2.0]])
