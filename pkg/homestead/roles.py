"""
roles.py: Planner, observer and executor.

    Each role renders its prompt template, asks a completion backend and
    reads the answer back through its output grammar.

"""
import logging

from homestead import grammar, prompts, world
from homestead.exceptions import BackendError, GrammarError, ValidationError

logger = logging.getLogger('homestead')

PLANNER = 'planner'
OBSERVER = 'observer'
EXECUTOR = 'executor'

_OBSERVER_FIELDS = (('Room type', 'room_type'), ('Task description', 'task_description'),
                    ('Current subtask', 'current_subtask'), ('Previously found objects', 'previously_found_objects'),
                    ('Objects in current view', 'objects_in_current_view'), ('Holding object', 'holding_object'),
                    ('Error message', 'error_message'))


def render_examples(examples):
    return '\n\n'.join(examples) if examples else 'None'


def render_feedback(feedback):
    if not feedback:
        return ''
    return 'Feedback from the previous attempt:\n' + '\n'.join('- {0}'.format(line) for line in feedback)


def plan(instruction, examples, backend, feedback=()):
    """
    Decompose an instruction into subtasks.

    Unparseable output is answered with one format reminder; a second
    failure raises GrammarError.
    """
    prompt = prompts.render_prompt(prompts.PLANNER, examples=render_examples(examples),
                                   instruction=instruction.high_level, feedback=render_feedback(feedback))
    try:
        return grammar.parse_plan(backend.complete(prompt, PLANNER))
    except GrammarError as exception:
        logger.warning('Planner output unreadable, retrying', extra_tags={'error': str(exception)})
    reminded = '{0}\n\n{1}'.format(prompt, prompts.render_prompt(prompts.PLANNER_REMINDER))
    return grammar.parse_plan(backend.complete(reminded, PLANNER))


class StateDescription:
    def __init__(self, text, fields):
        self.text = text
        self.fields = dict(fields)

    def __repr__(self):
        return 'StateDescription({0!r})'.format(self.text)


def _observer_fields(bundle):
    return {key: bundle.get(key) for _, key in _OBSERVER_FIELDS}


def identity_summary(bundle):
    """Template fill of the structured facts, one 'Label: value' per field"""
    fields = _observer_fields(bundle)
    return '; '.join('{0}: {1}'.format(label, prompts.as_text(fields[key])) for label, key in _OBSERVER_FIELDS)


def summarize(bundle, backend, identity=False):
    """Task-centric description of the state bundle; backend failures fall back to the identity fill"""
    fields = _observer_fields(bundle)
    if identity:
        return StateDescription(identity_summary(bundle), fields)
    prompt = prompts.render_prompt(prompts.OBSERVER, **fields)
    try:
        text = backend.complete(prompt, OBSERVER).strip()
    except BackendError as exception:
        logger.warning('Observer backend failed, using the identity summary', extra_tags={'error': str(exception)})
        text = identity_summary(bundle)
    return StateDescription(text, fields)


def detect_action_failure(prev_obs, cur_obs, action):
    """'<action> had no effect' when the view did not change across an action that should change it"""
    kind = getattr(action, 'kind', action)
    if prev_obs is None or cur_obs is None or kind is None:
        return None
    if kind not in world.NAVIGATION_ACTIONS and kind not in world.INTERACTION_ACTIONS:
        return None
    if prev_obs.rgb_digest == cur_obs.rgb_digest:
        return '{0} had no effect'.format(kind)
    return None


class ShortTermMemory:
    """Executor steps and their outcomes within the current subtask"""
    def __init__(self):
        self.entries = []

    def __len__(self):
        return len(self.entries)

    def add(self, step, outcome):
        self.entries.append((step, outcome))

    def add_invalid(self, step, error):
        self.entries.append((step, error))

    def clear(self):
        self.entries = []

    def render(self):
        if not self.entries:
            return 'None'
        lines = []
        for index, (step, outcome) in enumerate(self.entries, start=1):
            if isinstance(outcome, str):
                result = 'invalid: {0}'.format(outcome)
            elif outcome.error_message:
                result = '{0}: {1}'.format(outcome.status, outcome.error_message)
            else:
                result = outcome.status
            lines.append('{0}. {1} -> {2}'.format(index, step.action_text(), result))
        return '\n'.join(lines)


def render_catalog(catalog):
    lines = []
    for name, arity, description in catalog:
        call = 'Play[{0}, <Target>]'.format(name) if arity else 'Play[{0}]'.format(name)
        lines.append('- {0}: {1}'.format(call, description))
    return '\n'.join(lines)


def executor_step(description, memory, subtask, catalog, backend, found=(), visible=()):
    """
    Next executor decision for the current subtask.

    Malformed output gets one format reminder before GrammarError is
    raised. A Play that fails validation raises ValidationError carrying
    the parsed step as .step.
    """
    prompt = prompts.render_prompt(prompts.EXECUTOR, skills=render_catalog(catalog), observation=description.text,
                                   found_objects=list(found), visible_objects=list(visible),
                                   previous_steps=memory.render(), objective=subtask)
    try:
        step = grammar.parse_executor(backend.complete(prompt, EXECUTOR))
    except GrammarError as exception:
        logger.warning('Executor output unreadable, retrying', extra_tags={'error': str(exception)})
        reminded = '{0}\n\n{1}'.format(prompt, prompts.render_prompt(prompts.EXECUTOR_REMINDER, error=str(exception)))
        step = grammar.parse_executor(backend.complete(reminded, EXECUTOR))
    names = list(found) + [name for name in visible if name not in found]
    try:
        return grammar.validate_step(step, catalog, names)
    except ValidationError as exception:
        exception.step = step
        raise
