import numpy as np
import pytest

from homestead import goals, grammar, skills
from homestead.exceptions import GrammarError, ValidationError

PLAN_TEXT = """task type:   PICK_AND_PLACE_SIMPLE
Thought: First find a mug,
 then place it.
plan:
1. find a mug
2)  pick up   the mug
- put it on the shelf"""

CANONICAL_PLAN = """Task type: PICK_AND_PLACE_SIMPLE
Thought: First find a mug, then place it.
Plan:
1. find a mug
2. pick up the mug
3. put it on the shelf"""


def test_parse_plan():
    plan = grammar.parse_plan(PLAN_TEXT)
    assert plan.task_type == 'PICK_AND_PLACE_SIMPLE'
    assert plan.thought == 'First find a mug, then place it.'
    assert plan.subtasks == ['find a mug', 'pick up the mug', 'put it on the shelf']


def test_plan_normalization_matches_rendering():
    assert grammar.render_plan(grammar.parse_plan(PLAN_TEXT)) == CANONICAL_PLAN
    assert grammar.normalize_plan(PLAN_TEXT) == CANONICAL_PLAN
    assert grammar.parse_plan(CANONICAL_PLAN) == grammar.parse_plan(PLAN_TEXT)


def test_plan_item_on_the_plan_line():
    plan = grammar.parse_plan('Task type: PICK_AND_PLACE_SIMPLE\nThought: ok\nPlan: 1. find a mug\n2. pick it up')
    assert plan.subtasks == ['find a mug', 'pick it up']


@pytest.mark.parametrize('text', ['Thought: hmm\nPlan:\n1. find a mug',
                                  'Task type: PICK_AND_PLACE_SIMPLE\nThought: hmm',
                                  'Task type: PICK_AND_PLACE_SIMPLE\nPlan:\n1. find a mug\nthen pick it up',
                                  'Task type: PICK_AND_PLACE_SIMPLE\nPlan:',
                                  ''])
def test_malformed_plans(text):
    with pytest.raises(GrammarError):
        grammar.parse_plan(text)


def test_parse_executor():
    step = grammar.parse_executor('Thought: the mug is close.  Action:  play[ PickupObject , mug ]')
    assert step.thought == 'the mug is close.'
    assert (step.action, step.skill, step.target) == (grammar.PLAY, 'PickupObject', 'mug')
    assert grammar.render_executor(step) == 'Thought: the mug is close.\nAction: Play[PickupObject, mug]'


def test_executor_without_target_and_finish():
    assert grammar.parse_executor('Thought: look\nAction: Play[LookAround]').target is None
    step = grammar.parse_executor('Thought: all done\nAction: finish.')
    assert step.is_finish
    assert grammar.normalize_executor('thought:all done\naction: Finish') == 'Thought: all done\nAction: Finish'


@pytest.mark.parametrize('text', ['Thought: no action here', 'Action: Dance[mug]', 'Action: Play[]'])
def test_malformed_executor_output(text):
    with pytest.raises(GrammarError):
        grammar.parse_executor(text)


def test_executor_step_validation():
    with pytest.raises(GrammarError):
        grammar.ExecutorStep('', 'Jump')


def test_validate_step_canonicalizes_targets():
    catalog = skills.skill_catalog()
    step = grammar.parse_executor('Thought: x\nAction: Play[PickupObject, counter_top]')
    validated = grammar.validate_step(step, catalog, ['CounterTop', 'Mug'])
    assert validated.target == 'CounterTop'


@pytest.mark.parametrize('action', ['Play[Teleport, mug]', 'Play[PickupObject]', 'Play[LookAround, mug]',
                                    'Play[PickupObject, vase]'])
def test_validate_step_rejections(action):
    step = grammar.parse_executor('Thought: x\nAction: {0}'.format(action))
    with pytest.raises(ValidationError):
        grammar.validate_step(step, skills.skill_catalog(), ['Mug'])


def test_finish_always_validates():
    step = grammar.parse_executor('Action: Finish')
    assert grammar.validate_step(step, skills.skill_catalog(), []) is step


WORDS = ['find', 'the', 'mug', 'then', 'put', 'it', 'on', 'shelf', 'open', 'drawer', 'apple', 'slice', 'with',
         'knife', 'turn', 'desklamp', 'heat', 'microwave', 'a', 'second', 'book']


def random_phrase(rng, low=1, high=8):
    return ' '.join(rng.choice(WORDS, size=int(rng.integers(low, high))))


def random_plan(rng):
    labels = sorted(goals.TASK_TYPE_LABELS.values())
    return grammar.SubtaskPlan(labels[int(rng.integers(len(labels)))], random_phrase(rng) + '.',
                               [random_phrase(rng) for _ in range(int(rng.integers(1, 7)))])


def random_step(rng):
    catalog = skills.skill_catalog()
    if rng.random() < 0.1:
        return grammar.ExecutorStep(random_phrase(rng), grammar.FINISH)
    name, arity, _ = catalog[int(rng.integers(len(catalog)))]
    return grammar.ExecutorStep(random_phrase(rng), grammar.PLAY, name, random_phrase(rng, 1, 3) if arity else None)


def untidy_plan(plan, rng):
    markers = ['{0}.', '{0})', '-', '*']
    lines = ['task  type :  {0}'.format(plan.task_type), 'THOUGHT:   {0}'.format(plan.thought), '', 'plan:']
    lines += ['  {0}   {1}'.format(markers[int(rng.integers(len(markers)))].format(index), subtask.replace(' ', '  '))
              for index, subtask in enumerate(plan.subtasks, start=1)]
    return '\n'.join(lines)


def test_generated_plans_round_trip():
    rng = np.random.default_rng(8)
    for _ in range(200):
        plan = random_plan(rng)
        text = grammar.render_plan(plan)
        assert grammar.parse_plan(text) == plan
        assert grammar.normalize_plan(text) == text
        untidy = untidy_plan(plan, rng)
        assert grammar.parse_plan(untidy) == plan
        assert grammar.normalize_plan(untidy) == text


def test_generated_executor_steps_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(200):
        step = random_step(rng)
        text = grammar.render_executor(step)
        assert grammar.parse_executor(text) == step
        assert grammar.normalize_executor(text) == text
        action = step.action_text().replace('Play[', 'play[ ').replace('Finish', 'finish')
        untidy = 'thought :  {0}   action:  {1}'.format(step.thought, action)
        assert grammar.normalize_executor(untidy) == text
