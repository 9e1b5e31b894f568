import numpy as np
import pytest
from astropy.table import Table

from homestead import metrics
from homestead.exceptions import MetricsError
from homestead.trajectory import Trajectory
from homestead.tests.utils import labeled_trajectories, make_trajectory, moves


@pytest.fixture
def four_episodes():
    return [make_trajectory('a', 2, 2, 10, 10, moves(10)),
            make_trajectory('b', 2, 2, 20, 10, moves(20)),
            make_trajectory('c', 1, 2, 5, 10, moves(5)),
            make_trajectory('d', 0, 4, 16, 8, moves(16, goal_located=False))]


def test_path_weight():
    assert metrics.path_weight(10, 20) == 0.5
    assert metrics.path_weight(10, 5) == 1.0
    assert metrics.path_weight(0, 0) == 1.0
    assert metrics.path_weight(0, 7) == 0.0


def test_compute_metrics(four_episodes):
    run = metrics.compute_metrics(four_episodes)
    assert run.sr == pytest.approx(0.5)
    assert run.gc == pytest.approx(0.625)
    assert run.plwsr == pytest.approx(0.375)
    assert run.plwgc == pytest.approx(0.5)
    assert run.weights == [1.0, 0.5, 1.0, 0.5]
    assert list(run.as_percentages().values()) == pytest.approx([50.0, 62.5, 37.5, 50.0])
    assert run.to_dict()['episodes'] == 4


def test_weighted_metrics_never_exceed_unweighted(four_episodes):
    run = metrics.compute_metrics(four_episodes)
    assert run.plwsr <= run.sr
    assert run.plwgc <= run.gc


def test_weighted_metrics_on_random_runs():
    rng = np.random.default_rng(6)
    for run_index in range(1000):
        trajectories, lengths = [], []
        for episode in range(int(rng.integers(1, 12))):
            total = int(rng.integers(1, 5))
            expert_length, path_length = int(rng.integers(1, 60)), int(rng.integers(0, 120))
            trajectories.append(make_trajectory('{0}-{1}'.format(run_index, episode), int(rng.integers(0, total + 1)),
                                                total, path_length, expert_length))
            lengths.append((expert_length, path_length))
        run = metrics.compute_metrics(trajectories)
        assert run.plwsr <= run.sr + 1e-12
        assert run.plwgc <= run.gc + 1e-12
        for weight, (expert_length, path_length) in zip(run.weights, lengths):
            assert (weight == 1.0) == (path_length <= expert_length)
            assert 0.0 < weight <= 1.0


def test_metric_errors():
    with pytest.raises(MetricsError):
        metrics.compute_metrics([])
    with pytest.raises(MetricsError):
        metrics.compute_metrics([make_trajectory('no-expert', 1, 2, 5, None)])
    with pytest.raises(MetricsError):
        metrics.compute_metrics([Trajectory('unfinished')])


def test_error_modes_match_hand_labels():
    for trajectory, label in labeled_trajectories():
        assert metrics.classify_error(trajectory) == label, trajectory.episode_id


def test_successes_have_no_error_mode():
    with pytest.raises(ValueError):
        metrics.classify_error(make_trajectory('fine', 2, 2, 10, 10, moves(10)))


def test_error_histogram():
    labeled = [trajectory for trajectory, _ in labeled_trajectories()]
    histogram = metrics.error_histogram(labeled + [make_trajectory('fine', 2, 2, 10, 10, moves(10))])
    assert list(histogram) == list(metrics.ERROR_MODES)
    assert set(histogram.values()) == {3}


def test_thresholds_can_be_tightened():
    trajectory = dict((item[0].episode_id, item[0]) for item in labeled_trajectories())['bump-3']
    assert metrics.classify_error(trajectory, collision_fraction=0.5) == metrics.INTERACTION_FAILURES


def test_zero_thresholds_are_honoured():
    by_id = dict((trajectory.episode_id, trajectory) for trajectory, _ in labeled_trajectories())
    assert metrics.classify_error(by_id['grasp-1'], collision_fraction=0) == metrics.COLLISIONS
    assert metrics.classify_error(by_id['other-1'], interaction_failures=0) == metrics.INTERACTION_FAILURES
    assert metrics.classify_error(by_id['other-1']) == metrics.OTHERS


def test_fifteen_labeled_trajectories():
    labels = [label for _, label in labeled_trajectories()]
    assert len(labels) == 15
    assert all(labels.count(mode) == 3 for mode in metrics.ERROR_MODES)


def test_dialogue_episodes_are_classified_from_turns():
    looking = {'type': 'turn', 'turn': 2, 'speaker': 'actor', 'content': 'go to countertop 1',
               'grounded_action': 'go to countertop 1', 'observation': 'On the countertop 1, you see a pen 1.'}
    unseen = make_trajectory('talk-1', 0, 2, 1, 4, records=[looking])
    assert metrics.classify_error(unseen) == metrics.GOAL_OBJECT_NOT_FOUND

    found = dict(looking, observation='On the countertop 1, you see a mug 1.')
    failed_open = {'type': 'turn', 'turn': 4, 'speaker': 'actor', 'content': 'open drawer 1',
                   'grounded_action': 'open drawer 1', 'observation': 'Nothing happens: target not visible'}
    closed = make_trajectory('talk-2', 0, 2, 2, 4, records=[found, failed_open],
                             closed_goal_receptacles=['drawer_1'])
    assert metrics.classify_error(closed) == metrics.OBJECT_IN_CLOSED_RECEPTACLE

    opened = dict(failed_open, observation='You open the drawer 1. The drawer 1 is open. In it, you see nothing.')
    reached = make_trajectory('talk-3', 0, 2, 2, 4, records=[found, opened], closed_goal_receptacles=['drawer_1'])
    assert metrics.classify_error(reached) == metrics.OTHERS


def test_results_table(four_episodes, tmpdir):
    table = metrics.results_table(four_episodes)
    assert table.colnames == list(metrics.RESULTS_COLUMNS)
    assert list(table['episode']) == ['a', 'b', 'c', 'd']
    assert list(table['error_mode']) == ['', '', 'Others', 'GoalObjectNotFound']
    np.testing.assert_allclose(table['w'], [1.0, 0.5, 1.0, 0.5])
    path = metrics.write_results(table, str(tmpdir.join('results.csv')))
    restored = Table.read(path, format='ascii.csv')
    assert list(restored['L_hat']) == [10, 20, 5, 16]
    assert list(restored['L_star']) == [10, 10, 10, 8]


def test_results_table_without_expert_lengths():
    table = metrics.results_table([make_trajectory('no-expert', 1, 2, 5, None, moves(5))])
    assert table['L_star'][0] == -1
    assert np.isnan(table['w'][0])
