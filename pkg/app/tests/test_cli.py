"""Tests for the fqi-air command line"""
import pandas as pd
import pytest

from app.cli.main import main
from app.libs.algos import policy_from_text
from app.libs.core import read_dataset
from app.tests.utils.env import TEST_RUN_LOG_FILENAME
from app.tests.utils.fixtures import get_fixture_path


@pytest.fixture
def collected(tmp_path):
    """a small random-policy order execution dataset written by the collect command"""
    path = tmp_path / "data" / "order.csv"
    code = main(
        [
            "collect",
            "--env=order",
            "--policy=random",
            "--episodes=6",
            "--horizon=4",
            "--seed=2",
            f"--out={path}",
        ]
    )
    assert code == 0
    yield path


@pytest.fixture
def trained(collected, tmp_path):
    """a tabular FQI-AIR policy trained on the collected dataset"""
    path = tmp_path / "policies" / "fqi-air.json"
    path.parent.mkdir()
    code = main(
        [
            "train",
            "--algo=fqi-air",
            f"--data={collected}",
            f"--config={get_fixture_path('train_config.txt')}",
            f"--out={path}",
        ]
    )
    assert code == 0
    yield path


def test_collect_writes_dataset_and_meta(collected):
    d = read_dataset(collected)

    assert len(d) == 6
    assert d.horizon == 4
    assert d.meta.policy == "random"
    assert not d.has_final_states
    assert len(pd.read_csv(collected)) == 6 * 4
    assert collected.with_name("order.meta").is_file()


def test_collect_with_final_state_adds_a_terminal_row(tmp_path):
    path = tmp_path / "order.csv"
    code = main(
        [
            "collect",
            "--env=order",
            "--policy=random",
            "--episodes=5",
            "--horizon=4",
            "--seed=2",
            "--final-state",
            f"--out={path}",
        ]
    )

    assert code == 0
    frame = pd.read_csv(path)
    assert len(frame) == 5 * (4 + 1)
    assert sorted(frame.loc[frame["h"] == 4, "episode"]) == list(range(5))
    assert read_dataset(path).has_final_states


def test_train_writes_policy_and_log(trained):
    policy = policy_from_text(trained.read_text(encoding="utf-8"))

    assert policy.kind == "greedy"
    log = (trained.parent / TEST_RUN_LOG_FILENAME).read_text(encoding="utf-8")
    assert "algo=fqi-air" in log


def test_evaluate_offline(trained, collected, tmp_path):
    """Replaying on a dataset writes one row with the estimate and its radius"""
    out = tmp_path / "offline.csv"
    code = main(
        [
            "evaluate",
            f"--policy={trained}",
            f"--data={collected}",
            "--seed=4",
            f"--out={out}",
        ]
    )

    table = pd.read_csv(out)
    assert code == 0
    assert list(table.columns) == ["n", "j_hat", "bound", "zeta", "seed"]
    assert table["n"].tolist() == [6]
    assert table["seed"].tolist() == [4]


def test_evaluate_online(trained, tmp_path):
    out = tmp_path / "online.csv"
    code = main(
        [
            "evaluate",
            f"--policy={trained}",
            "--env=order",
            "--horizon=4",
            "--rollouts=3",
            f"--out={out}",
        ]
    )

    table = pd.read_csv(out)
    assert code == 0
    assert list(table.columns) == ["policy", "rollouts", "mean", "stderr"]
    assert table["rollouts"].tolist() == [3]


def test_sweep_command(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            f"--config={get_fixture_path('sweep.tiny.toml')}",
            f"--out={out}",
            "--workers=1",
        ]
    )

    assert code == 0
    assert len(pd.read_csv(out)) == 12


def test_reproduce_prints_written_paths(tmp_path, capsys):
    code = main(
        [
            "reproduce",
            "--figure=sim_eps0",
            f"--config={get_fixture_path('reproduce.tiny.toml')}",
            f"--out={tmp_path}",
            "--workers=1",
        ]
    )

    assert code == 0
    assert capsys.readouterr().out.strip() == str(tmp_path / "sim_eps0.csv")


def test_library_errors_exit_with_one(collected, tmp_path, capsys):
    """Errors are printed to stderr instead of raised"""
    code = main(
        [
            "train",
            "--algo=fqi",
            f"--data={collected}",
            f"--config={get_fixture_path('bad_train_config.txt')}",
            f"--out={tmp_path / 'policy.json'}",
        ]
    )

    assert code == 1
    assert "unknown key 'learning_rate'" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["train", "--algo=fqi", "--data=/nonexistent/data.csv", "--out=/tmp/p.json"],
        ["reproduce", "--figure=traj_sim", "--scale=0", "--out=/tmp/fqi-air-tests/x"],
    ],
)
def test_invalid_inputs_exit_with_one(argv):
    assert main(argv) == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["collect", "--env=pong", "--policy=random", "--episodes=1", "--out=x.csv"],
        ["train", "--algo=dqn", "--data=x.csv", "--out=p.json"],
        ["evaluate", "--policy=p.json", "--out=o.csv"],
    ],
)
def test_usage_errors_exit_with_two(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_reproduce_forwards_its_options(mocker, tmp_path):
    """Scale, seed and worker count reach the harness unchanged"""
    reproduce_figure = mocker.patch(
        "app.cli.main.reproduce_figure", return_value=[tmp_path / "traj_sim.csv"]
    )
    code = main(
        [
            "reproduce",
            "--figure=traj_sim",
            "--scale=0.1",
            "--seed=9",
            "--workers=3",
            f"--out={tmp_path}",
        ]
    )

    assert code == 0
    reproduce_figure.assert_called_once_with("traj_sim", str(tmp_path), 0.1, 9, None, 3)
