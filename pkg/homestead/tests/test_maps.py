import numpy as np
import pytest

from homestead import maps, world
from homestead.maps import SemanticMaps, locate, mark_obstacle, traversability_grid, update_maps
from homestead.world import Detection, EgocentricObservation
from homestead.tests.utils import mug_on_counter


def observation(detections, visible_cells, pitch='level'):
    return EgocentricObservation([Detection(*detection) for detection in detections], visible_cells, 'digest', pitch)


def test_true_observation_fills_both_views():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    semantic = update_maps(SemanticMaps(state.shape), world.observe(state), state.pose)
    result = locate(semantic, 'Mug')
    assert result.source == maps.SUPPLEMENTARY
    assert result.cells == [(1, 1)]
    assert result.tokens[(1, 1)] == ['mug_1']
    assert semantic.explored[3, 3]
    assert semantic.known_classes() == ['CounterTop', 'Mug', 'Shelf']


def test_majority_vote_survives_a_late_mislabel():
    semantic = SemanticMaps((3, 3))
    for _ in range(3):
        update_maps(semantic, observation([('Mug', (1, 1), 'mug_1')], [(1, 1)]))
    update_maps(semantic, observation([('Cup', (1, 1), 'mug_1')], [(1, 1)]))

    assert semantic.majority_label('mug_1') == 'Mug'
    assert semantic.effective_labels((1, 1)) == {'Mug'}
    assert semantic.effective_labels((1, 1), use_supplementary=False) == {'Cup'}
    assert locate(semantic, 'Mug').source == maps.SUPPLEMENTARY
    assert locate(semantic, 'Mug', use_supplementary=False) is None


def test_vote_map_improves_localization_under_mislabeling():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    noise = world.NoiseConfig(mislabel=0.2, confusion={'Mug': 'Cup'})
    cascaded, instantaneous = 0, 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        semantic = SemanticMaps(state.shape)
        for _ in range(15):
            update_maps(semantic, world.observe(state, noise, rng), state.pose)
        with_votes, without_votes = locate(semantic, 'Mug'), locate(semantic, 'Mug', use_supplementary=False)
        hit_with = with_votes is not None and with_votes.cells == [(1, 1)]
        hit_without = without_votes is not None and without_votes.cells == [(1, 1)]
        assert hit_with or not hit_without
        cascaded += hit_with
        instantaneous += hit_without
    assert (cascaded - instantaneous) / 50.0 >= 0.05


def test_tied_votes_fall_back_to_the_instantaneous_map():
    semantic = SemanticMaps((3, 3))
    update_maps(semantic, observation([('Mug', (1, 1), 'mug_1')], [(1, 1)]))
    update_maps(semantic, observation([('Cup', (1, 1), 'mug_1')], [(1, 1)]))
    assert semantic.majority_label('mug_1') is None
    assert locate(semantic, 'Mug') is None
    result = locate(semantic, 'Cup')
    assert result.source == maps.INSTANTANEOUS
    assert result.cell == (1, 1)


def test_empty_view_clears_the_instantaneous_cell():
    semantic = SemanticMaps((3, 3))
    update_maps(semantic, observation([('Mug', (1, 1), 'mug_1')], [(1, 1)]))
    update_maps(semantic, observation([], [(1, 1)]))
    assert locate(semantic, 'Mug', use_supplementary=False) is None
    assert locate(semantic, 'Mug').source == maps.SUPPLEMENTARY


def test_detection_outside_the_map():
    with pytest.raises(ValueError):
        update_maps(SemanticMaps((3, 3)), observation([('Mug', (5, 5), 'mug_1')], []))


def test_traversability():
    semantic = SemanticMaps((3, 3))
    update_maps(semantic, observation([('Shelf', (0, 1), 'shelf_1'), ('Mug', (1, 1), 'mug_1'),
                                       ('Wall', (0, 0), 'wall-0-0')], [(0, 0), (0, 1), (1, 1), (2, 1)]))
    mark_obstacle(semantic, (2, 2))

    optimistic = traversability_grid(semantic)
    assert not optimistic[0, 0]
    assert not optimistic[0, 1]
    assert optimistic[1, 1]
    assert optimistic[2, 1]
    assert optimistic[1, 0]
    assert not optimistic[2, 2]

    pessimistic = traversability_grid(semantic, optimistic=False)
    assert not pessimistic[1, 0]
    assert pessimistic[2, 1]


def test_obstacle_classes():
    assert maps.is_obstacle_class('Wall')
    assert maps.is_obstacle_class('Fridge')
    assert not maps.is_obstacle_class('Mug')
    assert not maps.is_obstacle_class('Unicorn')


def test_relocate_a_carried_track():
    semantic = SemanticMaps((3, 3))
    update_maps(semantic, observation([('Mug', (1, 1), 'mug_1')], [(1, 1)]))
    semantic.relocate('mug_1', None)
    assert locate(semantic, 'Mug') is None
    semantic.relocate('mug_1', (2, 2))
    assert locate(semantic, 'Mug').cells == [(2, 2)]


def test_copy_is_independent():
    semantic = SemanticMaps((3, 3))
    update_maps(semantic, observation([('Mug', (1, 1), 'mug_1')], [(1, 1)]))
    duplicate = semantic.copy()
    update_maps(duplicate, observation([('Cup', (1, 1), 'mug_1')] * 3, [(1, 1)]))
    assert semantic.majority_label('mug_1') == 'Mug'
    assert duplicate.majority_label('mug_1') == 'Cup'


def test_dump_maps():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    semantic = update_maps(SemanticMaps(state.shape), world.observe(state), state.pose)
    text = maps.dump_maps(semantic)
    lines = text.split('\n')
    assert lines[0] == 'M (instantaneous):'
    assert "M' (majority vote):" in lines
    assert len(lines[1]) == state.shape[1]
    assert 'legend: ? unknown, . free, x collision' in lines
    assert "M' (majority vote):" not in maps.dump_maps(semantic, use_supplementary=False)
    assert np.array_equal(semantic.explored, semantic.copy().explored)
