import pytest
from astropy.utils.data import get_pkg_data_filename

from homestead import goals, scenarios
from homestead.exceptions import ScenarioError
from homestead.tests.utils import scenario_document

HAND_WRITTEN = ['pick_mug', 'two_books', 'symmetric_room', 'corner_shelf', 'sliced_apple', 'closed_drawer']


def scenario_path(name):
    return get_pkg_data_filename('data/scenarios/{0}.yaml'.format(name), 'homestead')


def mug_document(**changes):
    document = scenario_document([{'id': 'countertop_1', 'class': 'CounterTop', 'cell': [1, 1]},
                                  {'id': 'shelf_1', 'class': 'Shelf', 'cell': [1, 5]}],
                                 [{'id': 'mug_1', 'class': 'Mug', 'in': 'countertop_1'}],
                                 {'type': 'Pick&Place', 'object': 'Mug', 'receptacle': 'Shelf'})
    document.update(changes)
    return document


def assert_scenario_error(document, prefix):
    with pytest.raises(ScenarioError) as exception_info:
        scenarios.load_scenario(document)
    assert str(exception_info.value).startswith(prefix)


def test_load_scenario():
    scenario = scenarios.load_scenario(mug_document())
    assert scenario.state.agent_cell == (2, 3)
    assert scenario.state.shape == (5, 7)
    assert scenario.instruction.task_type == 'Pick&Place'
    assert scenario.instruction.high_level == 'put a mug in the shelf'
    assert scenario.goal_classes() == ['Mug']
    assert scenario.relevant_classes() == ['Mug', 'Shelf']
    assert scenario.closed_goal_receptacles() == []


def test_loading_is_deterministic():
    first, second = scenarios.load_scenario(mug_document()), scenarios.load_scenario(mug_document())
    assert first.state.signature() == second.state.signature()


def test_missing_field():
    document = mug_document()
    del document['grid']
    assert_scenario_error(document, 'grid: missing field')


def test_not_a_mapping():
    assert_scenario_error(['grid'], 'scenario: expected a mapping')


def test_ragged_grid():
    assert_scenario_error(mug_document(grid=['#####', '#..#']), 'grid:')


def test_unknown_cell_code():
    assert_scenario_error(mug_document(grid=['#######', '#..~..#', '#.....#', '#.....#', '#######']), 'grid[1]:')


def test_agent_on_a_wall():
    assert_scenario_error(mug_document(agent={'cell': [0, 0]}), 'agent.cell:')


def test_agent_inside_a_receptacle_cell():
    assert_scenario_error(mug_document(agent={'cell': [1, 1]}), 'agent.cell:')


def test_unknown_heading():
    assert_scenario_error(mug_document(agent={'cell': [2, 3], 'heading': 'NE'}), 'agent.heading:')


def test_unknown_object_class():
    document = mug_document()
    document['objects'][0]['class'] = 'Unicorn'
    assert_scenario_error(document, 'objects[0].class:')


def test_duplicate_ids():
    document = mug_document()
    document['objects'][0]['id'] = 'shelf_1'
    assert_scenario_error(document, 'objects[0].id:')


def test_object_on_a_wall():
    document = mug_document()
    document['receptacles'][1]['cell'] = [0, 5]
    assert_scenario_error(document, 'receptacles[1].cell:')


def test_unknown_container():
    document = mug_document()
    document['objects'][0]['in'] = 'cupboard_9'
    assert_scenario_error(document, 'objects.mug_1.in:')


def test_containment_cycle():
    document = mug_document()
    document['objects'] += [{'id': 'bowl_1', 'class': 'Bowl', 'in': 'pot_1'},
                            {'id': 'pot_1', 'class': 'Pot', 'in': 'bowl_1'}]
    assert_scenario_error(document, 'objects.bowl_1.in: containment cycle bowl_1 -> pot_1 -> bowl_1')


def test_self_containment():
    document = mug_document()
    document['objects'].append({'id': 'bowl_1', 'class': 'Bowl', 'in': 'bowl_1'})
    assert_scenario_error(document, 'objects.bowl_1.in: containment cycle bowl_1 -> bowl_1')


def test_nested_containers_load():
    document = mug_document()
    document['objects'] += [{'id': 'pot_1', 'class': 'Pot', 'in': 'countertop_1'},
                            {'id': 'bowl_1', 'class': 'Bowl', 'in': 'pot_1'}]
    scenario = scenarios.load_scenario(document)
    bowl = scenario.state.objects['bowl_1']
    assert [container.id for container in scenario.state.container_chain(bowl)] == ['pot_1', 'countertop_1']
    assert scenario.state.root_cell(bowl) == (1, 1)


def test_unknown_task_type():
    assert_scenario_error(mug_document(task={'type': 'Juggle', 'object': 'Mug'}), 'task.type:')


def test_goals_satisfied_at_load():
    document = mug_document()
    document['objects'][0]['in'] = 'shelf_1'
    document['objects'][0]['flags'] = {}
    document['task']['receptacle'] = 'Shelf'
    document['goals'] = [{'kind': 'placed', 'object': 'Mug', 'receptacle': 'Shelf'}]
    assert_scenario_error(document, 'goals:')


def test_explicit_goals_replace_derived_ones():
    scenario = scenarios.load_scenario(mug_document(goals=[{'kind': 'holding', 'object': 'Mug'}]))
    assert scenario.goals == [goals.GoalCondition('holding', 'Mug')]


def test_noise_block():
    scenario = scenarios.load_scenario(mug_document(noise={'mislabel': 0.2, 'confusion': {'Mug': 'Cup'}}))
    assert scenario.noise.mislabel == 0.2
    assert scenario.noise.confusion == {'Mug': 'Cup'}
    assert_scenario_error(mug_document(noise={'mislabel': 2.0}), 'noise:')


def test_openable_receptacles_start_closed():
    document = mug_document()
    document['receptacles'].append({'id': 'drawer_1', 'class': 'Drawer', 'cell': [3, 1]})
    document['objects'][0]['in'] = 'drawer_1'
    scenario = scenarios.load_scenario(document)
    assert scenario.state.objects['drawer_1'].is_closed
    assert scenario.closed_goal_receptacles() == ['drawer_1']


@pytest.mark.parametrize('name', HAND_WRITTEN)
def test_hand_written_scenarios_are_solvable(name):
    scenario = scenarios.read_scenario(scenario_path(name))
    assert scenario.name == name
    assert scenarios.check_solvable(scenario) > 0


def test_pick_mug_expert_length():
    assert scenarios.read_scenario(scenario_path('pick_mug')).expert_path_length() == 9


def test_sealed_box_is_unsolvable():
    scenario = scenarios.read_scenario(scenario_path('sealed_box'))
    assert scenario.closed_goal_receptacles() == ['box_1']
    assert scenarios.check_solvable(scenario) is None


@pytest.mark.parametrize('task_type', goals.TASK_TYPES)
def test_generated_scenarios(task_type):
    document = scenarios.generate_document(task_type, 0)
    assert document == scenarios.generate_document(task_type, 0)
    scenario = scenarios.load_scenario(document)
    assert scenario.instruction.task_type == task_type
    assert scenario.noise.mislabel == 0.0
    assert scenarios.check_solvable(scenario) is not None


def test_generated_mislabel_rate():
    scenario = scenarios.generate_scenario('Pick&Place', 2, mislabel=0.3)
    assert scenario.noise.mislabel == 0.3
    target = scenario.task['object']
    assert scenario.noise.confusion[target] != target
    assert scenario.noise.confusion[scenario.task['receptacle']] == 'Wall'


def test_generated_seeds_differ():
    documents = [scenarios.generate_document('Pick&Place', seed) for seed in range(5)]
    assert len({repr(document['receptacles']) for document in documents}) > 1


def test_describe_task():
    assert scenarios.describe_task({'type': 'Heat&Place', 'object': 'Apple', 'receptacle': 'DiningTable'}) == \
        'put a hot apple in the diningtable'
    assert scenarios.describe_task({'type': 'PickTwo&Place', 'object': 'Book', 'receptacle': 'Shelf'}) == \
        'put two books in the shelf'
    assert scenarios.describe_task({'type': 'ExamineInLight', 'object': 'Vase', 'lamp': 'DeskLamp'}) == \
        'examine a vase under the desklamp'
