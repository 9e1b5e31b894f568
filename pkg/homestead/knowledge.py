"""
knowledge.py: World knowledge learned from exploration.

    Exploration runs in the text environment and records alternating
    observation/command sequences. Summarization turns repeated evidence
    into statements, each normalized to a (subject, relation, polarity)
    triple over a fixed relation vocabulary, so duplicates and
    contradictions are found structurally.

    Relations:

        can-hold-multiple     subject 'agent'
        opens-before-access   subject 'receptacle'
        requires-knife        subject 'slicing'
        cleans-in, heats-in, cools-in   subject an appliance class, lowercased

    Knowledge files are JSON lists of {statement, triple, support, source}.

"""
import logging
import re

import numpy as np

from homestead import prompts, settings, textworld, world
from homestead.exceptions import KnowledgeError
from homestead.utils import file_utils, rng_utils

logger = logging.getLogger('homestead')

LEARNED = 'learned'
HUMAN = 'human'

HOLD_ONE = ('agent', 'can-hold-multiple', False)
OPEN_FIRST = ('receptacle', 'opens-before-access', True)
KNIFE_FIRST = ('slicing', 'requires-knife', True)

_APPLIANCE_RELATIONS = {'cleans-in': 'cleaning', 'heats-in': 'heating', 'cools-in': 'cooling'}
_APPLIANCE_VERBS = {'cleans-in': 'cleaned', 'heats-in': 'heated', 'cools-in': 'cooled'}

_STATEMENTS = {('can-hold-multiple', True): 'the agent can hold more than one object at a time',
               ('can-hold-multiple', False): 'the agent cannot hold more than one object at a time',
               ('opens-before-access', True): 'a closed receptacle must be opened before using it',
               ('opens-before-access', False): 'receptacles can be used without opening them',
               ('requires-knife', True): 'slicing requires holding a knife',
               ('requires-knife', False): 'slicing does not require a knife'}

_NEGATION = re.compile(r"\b(?:not|cannot|can't|unable|never|no)\b")

# (pattern, relation, polarity); the first match wins, so negated forms come first
_FIXED_PATTERNS = [
    (re.compile(r"\b(?:cannot|can ?not|can't|unable to|not able to)\s+(?:hold|carry)\s+"
                r"(?:more than (?:one|1)|two|2|multiple|several)"), 'can-hold-multiple', False),
    (re.compile(r"\b(?:only|just)\s+(?:hold|carry)\s+one\b|\b(?:hold|carry)\s+(?:only\s+)?one\s+(?:object|thing|item)"
                r"\s+at a time|\bno more than one\b"), 'can-hold-multiple', False),
    (re.compile(r"\bcan\s+(?:hold|carry)\s+(?:more than (?:one|1)|two|2|multiple|several)"),
     'can-hold-multiple', True),
    (re.compile(r"\bwithout (?:opening|open)\b|\b(?:need|needs) not be opened\b"), 'opens-before-access', False),
    (re.compile(r"\b(?:must|should|needs? to|has to|have to) be opened\b|\bopen\w*\b.*\b(?:before|first)\b"),
     'opens-before-access', True),
    (re.compile(r"\bslic\w*\b.*\b(?:without|does not need|doesn't need|does not require|doesn't require)\b.*\bknife"),
     'requires-knife', False),
    (re.compile(r"\bslic\w*\b.*\b(?:requires?|needs?|must|with)\b.*\bknife\b|\bknife\b.*\bslic"),
     'requires-knife', True)]

_APPLIANCE_PATTERNS = [(re.compile(r'\b(?:clean|wash|rins)\w*'), 'cleans-in'),
                       (re.compile(r'\b(?:heat|hot|warm|microwav)\w*'), 'heats-in'),
                       (re.compile(r'\b(?:cool|cold|chill)\w*'), 'cools-in')]


def _appliance_mentioned(text, role):
    words = re.findall(r'[a-z]+', text)
    for width in (2, 1):
        for index in range(len(words) - width + 1):
            object_class = world.canonical_class_name(''.join(words[index:index + width]))
            if object_class is not None and object_class != world.WALL_CLASS and \
                    role in world.load_catalog()[object_class].roles:
                return object_class.lower()
    return None


def normalize_statement(statement):
    """The (subject, relation, polarity) triple a statement asserts, or None"""
    text = ' '.join((statement or '').lower().split())
    for pattern, relation, polarity in _FIXED_PATTERNS:
        if pattern.search(text):
            subject = {'can-hold-multiple': 'agent', 'opens-before-access': 'receptacle',
                       'requires-knife': 'slicing'}[relation]
            return subject, relation, polarity
    for pattern, relation in _APPLIANCE_PATTERNS:
        if pattern.search(text):
            appliance = _appliance_mentioned(text, _APPLIANCE_RELATIONS[relation])
            if appliance is not None:
                return appliance, relation, _NEGATION.search(text) is None
    return None


def statement_for(triple):
    subject, relation, polarity = triple
    if relation in _APPLIANCE_VERBS:
        verb = _APPLIANCE_VERBS[relation]
        if polarity:
            return 'objects are {0} in the {1}'.format(verb, subject)
        return 'objects cannot be {0} in the {1}'.format(verb, subject)
    return _STATEMENTS[(relation, polarity)]


class KnowledgeItem:
    def __init__(self, statement, triple, support=1, source=LEARNED):
        if source not in (LEARNED, HUMAN):
            raise ValueError('Knowledge source must be {0} or {1}'.format(LEARNED, HUMAN))
        if source == LEARNED and support < 1:
            raise ValueError('Learned knowledge needs support of at least 1')
        self.statement = statement
        self.triple = tuple(triple)
        self.support = int(support)
        self.source = source

    @classmethod
    def from_triple(cls, triple, support=1, source=LEARNED):
        return cls(statement_for(triple), triple, support, source)

    @property
    def key(self):
        return self.triple[:2]

    def __eq__(self, other):
        return isinstance(other, KnowledgeItem) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'KnowledgeItem({0!r}, support={1}, {2})'.format(self.statement, self.support, self.source)

    def to_dict(self):
        return {'statement': self.statement, 'triple': list(self.triple), 'support': self.support,
                'source': self.source}

    @classmethod
    def from_dict(cls, document, source=None):
        statement = document.get('statement')
        triple = document.get('triple')
        if triple is None:
            triple = normalize_statement(statement)
            if triple is None:
                raise KnowledgeError('Cannot normalize knowledge statement {0!r}'.format(statement))
        subject, relation, polarity = triple
        return cls(statement or statement_for(triple), (subject, relation, bool(polarity)),
                   document.get('support', 1), source or document.get('source', LEARNED))


def filter_knowledge(candidates):
    """
    Merge duplicates and resolve contradictions.

    Duplicates (same triple) merge into one item whose support is the sum.
    Items sharing (subject, relation) with opposite polarity contradict:
    human knowledge beats learned knowledge, otherwise the higher support
    wins and equal support drops both. Output is sorted by descending
    support, then statement.
    """
    merged = {}
    for item in candidates:
        if item.triple not in merged:
            merged[item.triple] = KnowledgeItem(item.statement, item.triple, item.support, item.source)
            continue
        kept = merged[item.triple]
        source = HUMAN if HUMAN in (kept.source, item.source) else LEARNED
        statement = item.statement if item.source == HUMAN and kept.source != HUMAN else kept.statement
        merged[item.triple] = KnowledgeItem(statement, item.triple, kept.support + item.support, source)

    survivors = []
    by_key = {}
    for item in merged.values():
        by_key.setdefault(item.key, []).append(item)
    for key, items in by_key.items():
        if len(items) == 1:
            survivors.append(items[0])
            continue
        first, second = sorted(items, key=lambda item: item.triple[2])
        ranked = sorted(items, key=lambda item: (item.source == HUMAN, item.support), reverse=True)
        if (ranked[0].source == HUMAN) == (ranked[1].source == HUMAN) and ranked[0].support == ranked[1].support:
            logger.warning('Dropping contradictory knowledge with equal support',
                           extra_tags={'statements': [first.statement, second.statement]})
            continue
        logger.info('Resolved contradictory knowledge', extra_tags={'kept': ranked[0].statement,
                                                                    'dropped': ranked[1].statement})
        survivors.append(ranked[0])
    return sorted(survivors, key=lambda item: (-item.support, item.statement))


def render_knowledge(items):
    if not items:
        return 'None'
    return '\n'.join('- {0}'.format(item.statement) for item in items)


def read_knowledge(path, source=None):
    document = file_utils.read_json(path)
    if isinstance(document, dict):
        document = document.get('knowledge', [])
    return [KnowledgeItem.from_dict(entry, source) for entry in document]


def write_knowledge(items, path):
    file_utils.write_json([item.to_dict() for item in items], path)
    return path


class ExplorationSequence:
    """Alternating observations and commands [obs_0, a_0, obs_1, ..., obs_T] of one episode"""
    def __init__(self, episode_id, items=None):
        self.episode_id = episode_id
        self.items = list(items or [])
        if self.items and len(self.items) % 2 == 0:
            raise ValueError('A sequence starts and ends with an observation')

    def start(self, observation):
        if self.items:
            raise ValueError('Sequence {0} already started'.format(self.episode_id))
        self.items.append(observation)

    def extend(self, command, observation):
        if not self.items:
            raise ValueError('Sequence {0} has no initial observation'.format(self.episode_id))
        self.items += [command, observation]

    @property
    def observations(self):
        return self.items[0::2]

    @property
    def commands(self):
        return self.items[1::2]

    def transitions(self):
        """(command, resulting observation) pairs"""
        return list(zip(self.commands, self.observations[1:]))

    def render(self):
        lines = ['Episode {0}:'.format(self.episode_id)]
        for index, item in enumerate(self.items):
            lines.append('{0} {1}'.format('>' if index % 2 else ' ', item))
        return '\n'.join(lines)

    def to_dict(self):
        return {'episode': self.episode_id, 'items': list(self.items)}


class ExplorationLog:
    def __init__(self, sequences=None):
        self.sequences = list(sequences or [])

    def __len__(self):
        return len(self.sequences)

    def render(self):
        return '\n\n'.join(sequence.render() for sequence in self.sequences)

    def write(self, path):
        file_utils.write_json([sequence.to_dict() for sequence in self.sequences], path)
        return path

    @classmethod
    def read(cls, path):
        return cls([ExplorationSequence(entry['episode'], entry['items']) for entry in file_utils.read_json(path)])


class RandomPolicy:
    """Uniform choice among admissible state-changing commands"""
    def next_command(self, env, sequence, rng):
        commands = [command for command in env.admissible_commands()
                    if command not in ('look', 'inventory') and not command.startswith('examine')]
        if not commands:
            return None
        return commands[int(rng.integers(len(commands)))]


class ScriptedPolicy:
    """Replays fixed command lists, one list per episode, and stops when a list runs out"""
    def __init__(self, scripts):
        self.scripts = [list(script) for script in scripts]
        self.episode = -1

    def next_command(self, env, sequence, rng):
        if not sequence.commands:
            self.episode += 1
        script = self.scripts[self.episode % len(self.scripts)]
        position = len(sequence.commands)
        return script[position] if position < len(script) else None


def explore_collect(scenarios, policy, budget, seed=0, max_steps=None):
    """
    Run budget exploration episodes in the text environment.

    scenarios are cycled in order; every command and its observation is
    recorded, failures included.
    """
    if budget < 1:
        raise ValueError('Exploration budget must be at least 1')
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError('Exploration needs at least one scenario')
    max_steps = max_steps or settings.KNOWLEDGE_EPISODE_STEPS
    log = ExplorationLog()
    for index in range(budget):
        scenario = scenarios[index % len(scenarios)]
        rng = np.random.default_rng(rng_utils.derive_seed('explore', seed, index))
        env = textworld.TextEnvironment(scenario)
        sequence = ExplorationSequence('{0}-explore-{1}'.format(scenario.name, index))
        sequence.start(env.reset())
        for _ in range(max_steps):
            command = policy.next_command(env, sequence, rng)
            if command is None:
                break
            sequence.extend(command, env.step(command))
            if env.goal_status().success:
                break
        logger.info('Collected exploration episode', extra_tags={'episode_id': sequence.episode_id,
                                                                 'commands': len(sequence.commands)})
        log.sequences.append(sequence)
    return log


def _failure_error(observation):
    prefix = textworld.NOTHING_HAPPENS + ': '
    return observation[len(prefix):] if observation.startswith(prefix) else None


def evidence(sequence):
    """Triples one episode gives evidence for"""
    found = set()
    for command, observation in sequence.transitions():
        verb, arguments = textworld.parse_command(command)
        error = _failure_error(observation)
        if error is not None:
            if verb == 'take' and error == world.HANDS_FULL:
                found.add(HOLD_ONE)
            elif verb in ('put', 'take') and error == world.RECEPTACLE_CLOSED:
                found.add(OPEN_FIRST)
            elif verb == 'slice' and error == world.NEEDS_KNIFE:
                found.add(KNIFE_FIRST)
        elif verb in ('clean', 'heat', 'cool'):
            appliance = arguments['r'].rsplit(' ', 1)[0]
            found.add((appliance, {'clean': 'cleans-in', 'heat': 'heats-in', 'cool': 'cools-in'}[verb], True))
    return found


def rule_summaries(log, threshold=None):
    """Triples evidenced by at least threshold distinct episodes, with that count as support"""
    threshold = threshold or settings.KNOWLEDGE_SUPPORT_THRESHOLD
    support = {}
    for sequence in log.sequences:
        for triple in evidence(sequence):
            support[triple] = support.get(triple, 0) + 1
    return [KnowledgeItem.from_triple(triple, count) for triple, count in sorted(support.items())
            if count >= threshold]


def summarize_knowledge(log, backend, threshold=None):
    """Candidate knowledge from an exploration log"""
    if not len(log):
        raise ValueError('Cannot summarize an empty exploration log')
    if getattr(backend, 'kind', None) == 'oracle':
        return rule_summaries(log, threshold)
    prompt = prompts.render_prompt(prompts.KNOWLEDGE_SUMMARY, sequences=log.render())
    candidates = []
    for line in backend.complete(prompt, 'summarizer').splitlines():
        statement = re.sub(r'^\s*(?:[-*]|\d+[.)])\s*', '', line).strip()
        if not statement:
            continue
        triple = normalize_statement(statement)
        if triple is None:
            logger.info('Dropping knowledge candidate', extra_tags={'statement': statement,
                                                                    'reason': 'outside the relation vocabulary'})
            continue
        candidates.append(KnowledgeItem(statement, triple))
    return candidates
