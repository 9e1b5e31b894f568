import numpy as np
import pytest

from homestead import world
from homestead.world import LowLevelAction
from homestead.tests.utils import make_scenario, mug_on_counter


def act(state, kind, target=None):
    return world.step(state, LowLevelAction(kind, target))


def microwave_room():
    return make_scenario([{'id': 'countertop_1', 'class': 'CounterTop', 'cell': [1, 1]},
                          {'id': 'microwave_1', 'class': 'Microwave', 'cell': [1, 5], 'open': True}],
                         [{'id': 'mug_1', 'class': 'Mug', 'in': 'countertop_1'}],
                         {'type': 'Heat&Place', 'object': 'Mug', 'receptacle': 'Shelf'})


def drawer_room():
    return make_scenario([{'id': 'drawer_1', 'class': 'Drawer', 'cell': [1, 1]},
                          {'id': 'desk_1', 'class': 'Desk', 'cell': [1, 5]}],
                         [{'id': 'cellphone_1', 'class': 'CellPhone', 'in': 'drawer_1'}],
                         {'type': 'Pick&Place', 'object': 'CellPhone', 'receptacle': 'Desk'})


def test_unknown_action_is_rejected():
    with pytest.raises(ValueError):
        LowLevelAction('Fly')


def test_move_ahead_and_collide():
    state = mug_on_counter().state
    moved, outcome = act(state, 'MoveAhead')
    assert outcome.success
    assert moved.agent_cell == (1, 3)
    blocked, outcome = act(moved, 'MoveAhead')
    assert not outcome.success
    assert outcome.error_message == world.COLLISION
    assert outcome.error_kind == 'collision'
    assert blocked.agent_cell == (1, 3)
    assert blocked.step_count == 2


def test_cannot_walk_into_a_receptacle():
    state = mug_on_counter().state.with_pose((2, 1), 'N', 'level')
    blocked, outcome = act(state, 'MoveAhead')
    assert outcome.error_message == world.COLLISION
    assert blocked.agent_cell == (2, 1)


def test_rotation_cycles_headings():
    state = mug_on_counter().state
    for expected in ('E', 'S', 'W', 'N'):
        state, outcome = act(state, 'RotateRight')
        assert outcome.success
        assert state.heading == expected
    state, _ = act(state, 'RotateLeft')
    assert state.heading == 'W'


def test_pitch_limit():
    state = mug_on_counter().state
    state, outcome = act(state, 'LookUp')
    assert outcome.success and state.pitch == 'up'
    state, outcome = act(state, 'LookUp')
    assert outcome.error_message == world.PITCH_LIMIT
    assert state.pitch == 'up'


def test_pickup_and_place():
    state = mug_on_counter().state.with_pose((1, 2), 'W', 'level')
    state, outcome = act(state, 'PickupObject', 'mug_1')
    assert outcome.success
    assert state.held == 'mug_1'
    assert state.objects['mug_1'].location == world.HELD
    assert state.objects['mug_1'].picked

    state, outcome = act(state, 'PickupObject', 'countertop_1')
    assert outcome.error_message == world.HANDS_FULL

    state = state.with_pose((1, 4), 'E', 'level')
    state, outcome = act(state, 'PutObject', 'shelf_1')
    assert outcome.success
    assert state.held is None
    assert state.objects['mug_1'].location == 'shelf_1'


def test_failed_action_changes_only_the_step_count():
    state = mug_on_counter().state
    after, outcome = act(state, 'PickupObject', 'mug_1')
    assert outcome.error_message == world.NOT_VISIBLE
    assert after.signature() == state.signature()
    assert after.step_count == state.step_count + 1


def test_interaction_errors():
    state = mug_on_counter().state.with_pose((1, 2), 'W', 'level')
    _, outcome = act(state, 'PutObject', 'countertop_1')
    assert outcome.error_message == world.HANDS_EMPTY
    _, outcome = act(state, 'PickupObject', 'countertop_1')
    assert outcome.error_message == world.NOT_INTERACTABLE
    _, outcome = act(state, 'PickupObject', 'spaceship_1')
    assert outcome.error_message == world.UNKNOWN_TARGET
    _, outcome = act(state, 'PickupObject')
    assert outcome.error_message == world.MISSING_TARGET


def test_wrong_pitch_hides_the_target():
    scenario = make_scenario([{'id': 'shelf_1', 'class': 'Shelf', 'cell': [1, 1], 'height': 'high'},
                              {'id': 'desk_1', 'class': 'Desk', 'cell': [1, 5]}],
                             [{'id': 'book_1', 'class': 'Book', 'in': 'shelf_1'}],
                             {'type': 'Pick&Place', 'object': 'Book', 'receptacle': 'Desk'})
    state = scenario.state.with_pose((1, 2), 'W', 'level')
    _, outcome = act(state, 'PickupObject', 'book_1')
    assert outcome.error_message == world.NOT_VISIBLE
    assert world.interaction_poses(state, state.objects['book_1'])[-1] == ((1, 2), 'W', 'up')
    state, _ = act(state, 'LookUp')
    _, outcome = act(state, 'PickupObject', 'book_1')
    assert outcome.success


def test_closed_receptacle_hides_its_contents():
    state = drawer_room().state.with_pose((1, 2), 'W', 'level')
    phone = state.objects['cellphone_1']
    assert not state.is_visible(phone)
    _, outcome = act(state, 'PickupObject', 'cellphone_1')
    assert outcome.error_message == world.NOT_VISIBLE

    state, outcome = act(state, 'OpenObject', 'drawer_1')
    assert outcome.success
    assert state.is_visible(state.objects['cellphone_1'])
    _, outcome = act(state, 'OpenObject', 'drawer_1')
    assert outcome.error_message == world.ALREADY_OPEN
    state, outcome = act(state, 'PickupObject', 'cellphone_1')
    assert outcome.success


def test_putting_into_a_closed_receptacle_fails():
    state = drawer_room().state.with_pose((1, 2), 'W', 'level')
    state, _ = act(state, 'OpenObject', 'drawer_1')
    state, _ = act(state, 'PickupObject', 'cellphone_1')
    state, _ = act(state, 'CloseObject', 'drawer_1')
    _, outcome = act(state, 'PutObject', 'drawer_1')
    assert outcome.error_message == world.RECEPTACLE_CLOSED


def test_microwave_heats_its_contents():
    state = microwave_room().state.with_pose((1, 2), 'W', 'level')
    state, _ = act(state, 'PickupObject', 'mug_1')
    state = state.with_pose((1, 4), 'E', 'level')
    state, outcome = act(state, 'PutObject', 'microwave_1')
    assert outcome.success
    assert not state.objects['mug_1'].flags['hot']
    state, outcome = act(state, 'ToggleObjectOn', 'microwave_1')
    assert outcome.success
    assert state.objects['mug_1'].flags['hot']
    _, outcome = act(state, 'ToggleObjectOn', 'microwave_1')
    assert outcome.error_message == world.ALREADY_ON


def test_slicing_needs_a_knife():
    scenario = make_scenario([{'id': 'countertop_1', 'class': 'CounterTop', 'cell': [1, 1]},
                              {'id': 'sidetable_1', 'class': 'SideTable', 'cell': [1, 5]}],
                             [{'id': 'apple_1', 'class': 'Apple', 'in': 'countertop_1'},
                              {'id': 'knife_1', 'class': 'Knife', 'in': 'sidetable_1'}],
                             {'type': 'Pick&Place', 'object': 'Apple', 'receptacle': 'SideTable', 'sliced': True})
    state = scenario.state.with_pose((1, 2), 'W', 'level')
    _, outcome = act(state, 'SliceObject', 'apple_1')
    assert outcome.error_message == world.NEEDS_KNIFE

    state = state.with_pose((1, 4), 'E', 'level')
    state, _ = act(state, 'PickupObject', 'knife_1')
    state = state.with_pose((1, 2), 'W', 'level')
    state, outcome = act(state, 'SliceObject', 'apple_1')
    assert outcome.success
    assert state.objects['apple_1'].flags['sliced']


def test_field_of_view_is_a_forward_cone():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    cells = world.field_of_view(state)
    assert state.agent_cell not in cells
    for cell in cells:
        forward, lateral = state.egocentric(cell)
        assert forward >= 1
        assert abs(lateral) <= forward
        assert forward + abs(lateral) <= state.fov_distance


def test_observe_sees_what_is_in_front():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    observation = world.observe(state)
    assert observation.classes() == ['CounterTop', 'Mug', 'Shelf']
    assert all(detection.instance_id.startswith('wall-') for detection in observation.detections
               if detection.object_class == world.WALL_CLASS)
    mug = [detection for detection in observation.detections if detection.instance_id == 'mug_1'][0]
    assert mug.cell == (1, 1)

    looking_back = world.observe(state.with_pose((3, 3), 'S', 'level'))
    assert looking_back.classes() == []


def test_observation_noise():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    mislabelled = world.observe(state, world.NoiseConfig(mislabel=1.0, confusion={'Mug': 'Cup'}), rng=0)
    assert 'Cup' in mislabelled.classes()
    assert 'Mug' not in mislabelled.classes()

    dropped = world.observe(state, world.NoiseConfig(drop=1.0), rng=0)
    assert dropped.classes() == []
    assert any(detection.object_class == world.WALL_CLASS for detection in dropped.detections)


def test_noisy_observations_are_reproducible():
    state = mug_on_counter().state.with_pose((3, 3), 'N', 'level')
    noise = world.NoiseConfig(mislabel=0.5, drop=0.3, confusion={'Mug': 'Cup', 'Shelf': 'Wall'})
    first = world.observe(state, noise, rng=np.random.default_rng(7))
    second = world.observe(state, noise, rng=np.random.default_rng(7))
    assert first.detections == second.detections


def test_scene_digest_ignores_absolute_position():
    state = mug_on_counter().state
    assert world.scene_digest(state) == world.scene_digest(state.copy())
    assert world.scene_digest(state) != world.scene_digest(state.with_pose((3, 3), 'S', 'level'))


def test_interaction_poses():
    state = mug_on_counter().state
    poses = world.interaction_poses(state, state.objects['mug_1'])
    assert poses == [((2, 1), 'N', 'level'), ((2, 1), 'N', 'down'), ((2, 1), 'N', 'up'),
                     ((1, 2), 'W', 'level'), ((1, 2), 'W', 'down'), ((1, 2), 'W', 'up')]


def test_interaction_pitches():
    assert world.interaction_pitches('level') == ['level', 'down', 'up']
    assert world.interaction_pitches('low') == ['down']
    assert world.interaction_pitches('high') == ['up']


def test_canonical_class_names():
    assert world.canonical_class_name('sink basin') == 'SinkBasin'
    assert world.canonical_class_name('desklamp') == 'DeskLamp'
    assert world.canonical_class_name('Wall') == 'Wall'
    assert world.canonical_class_name('spaceship') is None
