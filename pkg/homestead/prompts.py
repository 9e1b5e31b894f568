"""
prompts.py: Prompt templates.

    Templates are plain text files under homestead/data/prompts with named
    placeholders written {name}. Every placeholder must be supplied when
    rendering; other braces are left alone.

"""
import functools
import os
import re

from homestead import settings
from homestead.utils import file_utils

_PLACEHOLDER = re.compile(r'\{([a-z_]+)\}')

PLANNER = 'planner'
PLANNER_REMINDER = 'planner_reminder'
OBSERVER = 'observer'
EXECUTOR = 'executor'
EXECUTOR_REMINDER = 'executor_reminder'
REASONER = 'reasoner'
ACTOR = 'actor'
KNOWLEDGE_SUMMARY = 'knowledge_summary'


@functools.lru_cache(maxsize=None)
def load_template(name, directory=None):
    directory = directory or file_utils.package_path(settings.PROMPT_DIRECTORY)
    path = os.path.join(directory, '{0}.txt'.format(name))
    if not os.path.exists(path):
        raise ValueError('No prompt template named {0}'.format(name))
    with open(path) as template_file:
        return template_file.read().rstrip('\n')


def placeholders(name, directory=None):
    return sorted(set(_PLACEHOLDER.findall(load_template(name, directory))))


def render_prompt(name, directory=None, /, **fields):
    template = load_template(name, directory)
    missing = sorted(set(_PLACEHOLDER.findall(template)) - set(fields))
    if missing:
        raise ValueError('Prompt {0} is missing fields: {1}'.format(name, ', '.join(missing)))
    return _PLACEHOLDER.sub(lambda match: as_text(fields[match.group(1)]), template)


def as_text(value):
    if value is None:
        return 'None'
    if isinstance(value, (list, tuple)):
        return ', '.join(str(item) for item in value)
    return str(value)


def field_value(prompt, label):
    """The text after the last '<label>:' line of a rendered prompt, or None"""
    value = None
    prefix = label + ':'
    for line in prompt.splitlines():
        if line.startswith(prefix):
            value = line[len(prefix):].strip()
    return value


def block_after(prompt, label, stop_labels=()):
    """Lines following the last '<label>:' line up to the next blank line or stop label"""
    lines = prompt.splitlines()
    starts = [index for index, line in enumerate(lines) if line.strip() == label + ':']
    if not starts:
        return []
    block = []
    for line in lines[starts[-1] + 1:]:
        if not line.strip() or any(line.startswith(stop + ':') for stop in stop_labels):
            break
        block.append(line.strip())
    return block


def split_names(value):
    if not value or value == 'None':
        return []
    return [name.strip() for name in value.split(',') if name.strip()]
