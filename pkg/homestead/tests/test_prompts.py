import pytest

from homestead import prompts


def test_planner_placeholders():
    assert prompts.placeholders(prompts.PLANNER) == ['examples', 'feedback', 'instruction']


def test_render_prompt_fills_every_field():
    text = prompts.render_prompt(prompts.PLANNER, instruction='put a mug on the shelf', examples=['a', 'b'],
                                 feedback=None)
    assert 'put a mug on the shelf' in text
    assert '{instruction}' not in text


def test_render_prompt_missing_fields():
    with pytest.raises(ValueError) as exception_info:
        prompts.render_prompt(prompts.PLANNER, instruction='x')
    assert 'examples, feedback' in str(exception_info.value)


def test_unknown_template():
    with pytest.raises(ValueError):
        prompts.render_prompt('limerick')


def test_custom_template_directory(tmpdir):
    tmpdir.join('greeting.txt').write('Hello {name}, {Braces} and {1} stay.\n')
    assert prompts.render_prompt('greeting', str(tmpdir), name='Ada') == 'Hello Ada, {Braces} and {1} stay.'


def test_as_text():
    assert prompts.as_text(None) == 'None'
    assert prompts.as_text(['Mug', 'Shelf']) == 'Mug, Shelf'
    assert prompts.as_text(3) == '3'


def test_field_value_takes_the_last_label():
    prompt = 'Objective: first\nnoise\nObjective: second\n'
    assert prompts.field_value(prompt, 'Objective') == 'second'
    assert prompts.field_value(prompt, 'Missing') is None


def test_block_after():
    prompt = 'Plan:\n1. a\n2. b\nThought: x\n\nPlan:\n1. c\n\n2. d'
    assert prompts.block_after(prompt, 'Plan') == ['1. c']
    assert prompts.block_after('Plan:\n1. a\nThought: x', 'Plan', stop_labels=('Thought',)) == ['1. a']
    assert prompts.block_after('nothing', 'Plan') == []


def test_split_names():
    assert prompts.split_names('Mug, Shelf ,') == ['Mug', 'Shelf']
    assert prompts.split_names('None') == []
    assert prompts.split_names('') == []
