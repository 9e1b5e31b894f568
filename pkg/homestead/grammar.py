"""
grammar.py: Output grammars of the planner and the executor.

    Planner output:

        Task type: PICK_CLEAN_THEN_PLACE_IN_RECEP
        Thought: <free text>
        Plan:
        1. <subtask>
        2. <subtask>

    Executor output:

        Thought: <free text>
        Action: Play[<Skill>, <Target>] | Play[<Skill>] | Finish

    normalize() canonicalizes whitespace, label case, and list markers so
    that render(parse(text)) == normalize(text) for every well-formed text.

"""
import re

from homestead.exceptions import GrammarError, ValidationError

FINISH = 'Finish'
PLAY = 'Play'

_LABEL = r'^\s*{0}\s*:\s*(.*?)\s*$'
_TASK_TYPE = re.compile(_LABEL.format('task\\s*type'), re.IGNORECASE)
_THOUGHT = re.compile(_LABEL.format('thought'), re.IGNORECASE)
_PLAN = re.compile(_LABEL.format('plan'), re.IGNORECASE)
_LIST_ITEM = re.compile(r'^\s*(?:\d+\s*[.)]|[-*])\s*(.+?)\s*$')
_PLAY = re.compile(r'^play\s*\[\s*([A-Za-z]+)\s*(?:,\s*([^\]]*?)\s*)?\]$', re.IGNORECASE)
_FINISH = re.compile(r'^finish\.?$', re.IGNORECASE)
_SPACES = re.compile(r'\s+')


def _squash(text):
    return _SPACES.sub(' ', text).strip()


class SubtaskPlan:
    def __init__(self, task_type, thought, subtasks):
        subtasks = [_squash(subtask) for subtask in subtasks if subtask and subtask.strip()]
        if not subtasks:
            raise GrammarError('A plan needs at least one subtask')
        self.task_type = _squash(task_type or '')
        self.thought = _squash(thought or '')
        self.subtasks = subtasks

    def __eq__(self, other):
        return isinstance(other, SubtaskPlan) and \
            (self.task_type, self.thought, self.subtasks) == (other.task_type, other.thought, other.subtasks)

    def __repr__(self):
        return 'SubtaskPlan({0}, {1} subtasks)'.format(self.task_type, len(self.subtasks))

    def to_dict(self):
        return {'task_type': self.task_type, 'thought': self.thought, 'subtasks': list(self.subtasks)}


def parse_plan(text):
    """Parse planner output, raising GrammarError when a section is missing"""
    task_type, thought, subtasks = None, None, None
    for line in (text or '').splitlines():
        if not line.strip():
            continue
        if subtasks is None:
            for pattern, name in ((_TASK_TYPE, 'task_type'), (_THOUGHT, 'thought')):
                match = pattern.match(line)
                if match:
                    if name == 'task_type':
                        task_type = match.group(1)
                    else:
                        thought = match.group(1)
                    break
            else:
                match = _PLAN.match(line)
                if match:
                    subtasks = []
                    if match.group(1):
                        item = _LIST_ITEM.match(match.group(1))
                        subtasks.append(item.group(1) if item else match.group(1))
                elif thought is not None:
                    thought += ' ' + line.strip()
            continue
        item = _LIST_ITEM.match(line)
        if item is None:
            raise GrammarError('Plan entries must be numbered: {0!r}'.format(line.strip()))
        subtasks.append(item.group(1))
    if task_type is None:
        raise GrammarError('Missing "Task type" section')
    if subtasks is None:
        raise GrammarError('Missing "Plan" section')
    return SubtaskPlan(task_type, thought, subtasks)


def render_plan(plan):
    lines = [_labelled('Task type', plan.task_type), _labelled('Thought', plan.thought), 'Plan:']
    lines += ['{0}. {1}'.format(index, subtask) for index, subtask in enumerate(plan.subtasks, start=1)]
    return '\n'.join(lines)


def normalize_plan(text):
    """Canonical spelling of well-formed planner output: fixed section order, labels, numbering, spacing"""
    sections = {'task_type': '', 'thought': ''}
    items, current = [], None
    for line in text.splitlines():
        if not line.strip():
            continue
        if current == 'plan':
            items.append(_squash(_LIST_ITEM.match(line).group(1)))
            continue
        task_type, thought, plan = _TASK_TYPE.match(line), _THOUGHT.match(line), _PLAN.match(line)
        if task_type:
            sections['task_type'], current = task_type.group(1), 'task_type'
        elif thought:
            sections['thought'], current = thought.group(1), 'thought'
        elif plan:
            current = 'plan'
            if plan.group(1):
                item = _LIST_ITEM.match(plan.group(1))
                items.append(_squash(item.group(1) if item else plan.group(1)))
        elif current == 'thought':
            sections['thought'] += ' ' + line
    lines = [_labelled('Task type', sections['task_type']), _labelled('Thought', sections['thought']), 'Plan:']
    lines += ['{0}. {1}'.format(index, item) for index, item in enumerate(items, start=1)]
    return '\n'.join(lines)


def _labelled(label, value):
    return '{0}: {1}'.format(label, _squash(value)).rstrip()


class ExecutorStep:
    def __init__(self, thought, action, skill=None, target=None):
        if action not in (PLAY, FINISH):
            raise GrammarError('Executor actions are Play or Finish, got {0}'.format(action))
        self.thought = _squash(thought or '')
        self.action = action
        self.skill = skill
        self.target = _squash(target) if target else None

    @property
    def is_finish(self):
        return self.action == FINISH

    def action_text(self):
        if self.is_finish:
            return FINISH
        if self.target is None:
            return 'Play[{0}]'.format(self.skill)
        return 'Play[{0}, {1}]'.format(self.skill, self.target)

    def __eq__(self, other):
        return isinstance(other, ExecutorStep) and \
            (self.thought, self.action, self.skill, self.target) == \
            (other.thought, other.action, other.skill, other.target)

    def __repr__(self):
        return 'ExecutorStep({0})'.format(self.action_text())

    def to_dict(self):
        return {'thought': self.thought, 'action': self.action_text()}


def parse_action(text):
    text = _squash(text)
    if _FINISH.match(text):
        return FINISH, None, None
    match = _PLAY.match(text)
    if match is None:
        raise GrammarError('Unrecognised action {0!r}'.format(text))
    return PLAY, match.group(1), match.group(2) or None


def parse_executor(text):
    """Parse executor output; the thought and the action may share one line"""
    text = (text or '').strip()
    action_match = _ACTION_ANYWHERE.search(text)
    if action_match is None:
        raise GrammarError('Missing "Action" section')
    thought_match = _THOUGHT_ANYWHERE.search(text[:action_match.start()])
    thought = thought_match.group(1) if thought_match else ''
    action, skill, target = parse_action(action_match.group(1))
    return ExecutorStep(thought, action, skill, target)


_ACTION_ANYWHERE = re.compile(r'\baction\s*:\s*(.*)$', re.IGNORECASE | re.DOTALL)
_THOUGHT_ANYWHERE = re.compile(r'\bthought\s*:\s*(.*)$', re.IGNORECASE | re.DOTALL)


def render_executor(step):
    return _labelled('Thought', step.thought) + '\nAction: ' + step.action_text()


def normalize_executor(text):
    return render_executor(parse_executor(text))


def validate_step(step, catalog, names):
    """
    Check a Play against the skill catalog and the object names the agent knows.

    catalog is the list returned by skills.skill_catalog(); names are the
    found and currently visible object class names.
    """
    if step.is_finish:
        return step
    arities = {name: arity for name, arity, _ in catalog}
    if step.skill not in arities:
        raise ValidationError('{0} is not in the skill catalog'.format(step.skill))
    if arities[step.skill] == 0:
        if step.target:
            raise ValidationError('{0} takes no target'.format(step.skill))
        return step
    if not step.target:
        raise ValidationError('{0} requires a target'.format(step.skill))
    known = {_key(name): name for name in names}
    if _key(step.target) not in known:
        raise ValidationError('{0} has not been found'.format(step.target))
    return ExecutorStep(step.thought, step.action, step.skill, known[_key(step.target)])


def _key(name):
    return name.replace(' ', '').replace('_', '').lower()
