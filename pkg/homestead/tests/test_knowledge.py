import pytest
from astropy.utils.data import get_pkg_data_filename

from homestead import knowledge, world
from homestead.backends import RuleOracleBackend, ScriptedBackend
from homestead.exceptions import KnowledgeError
from homestead.knowledge import ExplorationLog, ExplorationSequence, KnowledgeItem
from homestead.tests.utils import mug_on_counter

FIXED_TRIPLES = [knowledge.HOLD_ONE, ('agent', 'can-hold-multiple', True), knowledge.OPEN_FIRST,
                 ('receptacle', 'opens-before-access', False), knowledge.KNIFE_FIRST,
                 ('slicing', 'requires-knife', False)]

APPLIANCE_TRIPLES = [('microwave', 'heats-in', True), ('microwave', 'heats-in', False),
                     ('fridge', 'cools-in', True), ('sinkbasin', 'cleans-in', True)]


def failure(error):
    return 'Nothing happens: {0}'.format(error)


def sequence_with(episode_id, *transitions):
    sequence = ExplorationSequence(episode_id)
    sequence.start('You are in the middle of a kitchen.')
    for command, observation in transitions:
        sequence.extend(command, observation)
    return sequence


@pytest.mark.parametrize('statement,triple', [
    ('The agent cannot hold more than one object at a time.', knowledge.HOLD_ONE),
    ('You can only carry one thing at a time', knowledge.HOLD_ONE),
    ('You can carry two things', ('agent', 'can-hold-multiple', True)),
    ('Drawers must be opened before you take things out', knowledge.OPEN_FIRST),
    ('You can put things in a cabinet without opening it', ('receptacle', 'opens-before-access', False)),
    ('Slicing an apple requires a knife', knowledge.KNIFE_FIRST),
    ('Objects are heated in the microwave', ('microwave', 'heats-in', True)),
    ('Things cannot be cooled in the fridge', ('fridge', 'cools-in', False)),
    ('Wash dirty plates in the sink basin', ('sinkbasin', 'cleans-in', True)),
    ('The sky is blue', None),
    ('Heat it somewhere', None),
])
def test_normalize_statement(statement, triple):
    assert knowledge.normalize_statement(statement) == triple


@pytest.mark.parametrize('triple', FIXED_TRIPLES + APPLIANCE_TRIPLES)
def test_generated_statements_normalize_back(triple):
    assert knowledge.normalize_statement(knowledge.statement_for(triple)) == triple


def test_item_validation():
    with pytest.raises(ValueError):
        KnowledgeItem('x', knowledge.HOLD_ONE, support=0)
    with pytest.raises(ValueError):
        KnowledgeItem('x', knowledge.HOLD_ONE, source='rumour')
    assert KnowledgeItem('x', knowledge.HOLD_ONE, support=0, source=knowledge.HUMAN).support == 0
    with pytest.raises(KnowledgeError):
        KnowledgeItem.from_dict({'statement': 'the sky is blue'})
    item = KnowledgeItem.from_dict({'statement': 'slicing requires holding a knife'})
    assert item.triple == knowledge.KNIFE_FIRST
    assert item.source == knowledge.LEARNED


def test_filter_knowledge_fixture():
    candidates = knowledge.read_knowledge(get_pkg_data_filename('data/knowledge_fixture.json', 'homestead.tests'))
    assert len(candidates) == 20
    kept = knowledge.filter_knowledge(candidates)
    assert [(item.statement, item.support, item.source) for item in kept] == [
        ('objects are heated in the microwave', 4, knowledge.LEARNED),
        ('the agent cannot hold more than one object at a time', 3, knowledge.LEARNED),
        ('objects are cleaned in the sinkbasin', 2, knowledge.HUMAN),
        ('receptacles can be used without opening them', 1, knowledge.HUMAN)]


def test_filter_is_order_independent():
    candidates = knowledge.read_knowledge(get_pkg_data_filename('data/knowledge_fixture.json', 'homestead.tests'))
    assert knowledge.filter_knowledge(candidates) == knowledge.filter_knowledge(list(reversed(candidates)))
    kept = knowledge.filter_knowledge(candidates)
    assert knowledge.filter_knowledge(kept) == kept


def test_human_statement_wins_a_merge():
    learned = KnowledgeItem('the sink basin washes things', ('sinkbasin', 'cleans-in', True))
    human = KnowledgeItem('objects are cleaned in the sinkbasin', ('sinkbasin', 'cleans-in', True),
                          source=knowledge.HUMAN)
    merged = knowledge.filter_knowledge([learned, human])
    assert len(merged) == 1
    assert merged[0].statement == 'objects are cleaned in the sinkbasin'
    assert merged[0].support == 2
    assert merged[0].source == knowledge.HUMAN


def test_human_knowledge_file():
    items = knowledge.read_knowledge(get_pkg_data_filename('data/knowledge/human.json', 'homestead'))
    assert {item.triple for item in items} == {knowledge.HOLD_ONE, knowledge.OPEN_FIRST, knowledge.KNIFE_FIRST}
    assert all(item.source == knowledge.HUMAN for item in items)


def test_knowledge_round_trips_through_a_file(tmpdir):
    items = [KnowledgeItem.from_triple(knowledge.HOLD_ONE, 3), KnowledgeItem.from_triple(('fridge', 'cools-in', True))]
    path = knowledge.write_knowledge(items, str(tmpdir.join('knowledge.json')))
    assert knowledge.read_knowledge(path) == items


def test_render_knowledge():
    assert knowledge.render_knowledge([]) == 'None'
    items = [KnowledgeItem.from_triple(knowledge.HOLD_ONE)]
    assert knowledge.render_knowledge(items) == '- the agent cannot hold more than one object at a time'


def test_sequences_alternate():
    with pytest.raises(ValueError):
        ExplorationSequence('bad', ['obs', 'look'])
    sequence = ExplorationSequence('x')
    with pytest.raises(ValueError):
        sequence.extend('look', 'obs')
    sequence.start('obs 0')
    sequence.extend('go to shelf 1', 'obs 1')
    assert sequence.observations == ['obs 0', 'obs 1']
    assert sequence.transitions() == [('go to shelf 1', 'obs 1')]
    assert sequence.render() == 'Episode x:\n  obs 0\n> go to shelf 1\n  obs 1'
    with pytest.raises(ValueError):
        sequence.start('again')


def test_evidence_from_failures_and_transforms():
    sequence = sequence_with('a', ('take mug 2 from shelf 1', failure(world.HANDS_FULL)),
                             ('put mug 1 in/on drawer 1', failure(world.RECEPTACLE_CLOSED)),
                             ('slice apple 1 with mug 1', failure(world.NEEDS_KNIFE)),
                             ('heat mug 1 with microwave 1', 'You heat the mug 1 using the microwave 1.'),
                             ('go to shelf 1', failure(world.UNKNOWN_TARGET)))
    assert knowledge.evidence(sequence) == {knowledge.HOLD_ONE, knowledge.OPEN_FIRST, knowledge.KNIFE_FIRST,
                                            ('microwave', 'heats-in', True)}


def test_rule_summaries_need_repeated_evidence():
    log = ExplorationLog([
        sequence_with('a', ('take mug 2 from shelf 1', failure(world.HANDS_FULL)),
                      ('put mug 1 in/on drawer 1', failure(world.RECEPTACLE_CLOSED))),
        sequence_with('b', ('take mug 2 from shelf 1', failure(world.HANDS_FULL)),
                      ('take mug 2 from shelf 1', failure(world.HANDS_FULL)),
                      ('heat mug 1 with microwave 1', 'You heat the mug 1 using the microwave 1.'))])
    summaries = knowledge.rule_summaries(log, threshold=2)
    assert [(item.triple, item.support) for item in summaries] == [(knowledge.HOLD_ONE, 2)]
    everything = knowledge.rule_summaries(log, threshold=1)
    assert [item.triple for item in everything] == [knowledge.HOLD_ONE, ('microwave', 'heats-in', True),
                                                    knowledge.OPEN_FIRST]
    oracle = knowledge.summarize_knowledge(log, RuleOracleBackend(), threshold=2)
    assert oracle == summaries


def test_summarize_with_a_language_model():
    log = ExplorationLog([sequence_with('a', ('look', 'You see a shelf 1.'))])
    backend = ScriptedBackend([{'role': 'summarizer',
                                'completion': '1. The agent cannot hold more than one object at a time\n'
                                              '- the sky is blue\n\n* objects are heated in the microwave'}])
    candidates = knowledge.summarize_knowledge(log, backend)
    assert [item.triple for item in candidates] == [knowledge.HOLD_ONE, ('microwave', 'heats-in', True)]
    assert candidates[0].statement == 'The agent cannot hold more than one object at a time'
    with pytest.raises(ValueError):
        knowledge.summarize_knowledge(ExplorationLog(), backend)


def test_scripted_exploration():
    scripts = [['go to countertop 1', 'take mug 1 from countertop 1', 'take mug 1 from countertop 1']]
    log = knowledge.explore_collect([mug_on_counter()], knowledge.ScriptedPolicy(scripts), 2)
    assert len(log) == 2
    assert [sequence.episode_id for sequence in log.sequences] == ['test-room-explore-0', 'test-room-explore-1']
    assert log.sequences[0].commands == scripts[0]
    assert log.sequences[0].observations[-1] == failure(world.NOT_VISIBLE)


def test_random_exploration_is_reproducible(tmpdir):
    first = knowledge.explore_collect([mug_on_counter()], knowledge.RandomPolicy(), 3, seed=4, max_steps=6)
    second = knowledge.explore_collect([mug_on_counter()], knowledge.RandomPolicy(), 3, seed=4, max_steps=6)
    assert [sequence.items for sequence in first.sequences] == [sequence.items for sequence in second.sequences]
    path = first.write(str(tmpdir.join('exploration.json')))
    assert [sequence.items for sequence in ExplorationLog.read(path).sequences] == \
        [sequence.items for sequence in first.sequences]


def test_exploration_arguments():
    with pytest.raises(ValueError):
        knowledge.explore_collect([mug_on_counter()], knowledge.RandomPolicy(), 0)
    with pytest.raises(ValueError):
        knowledge.explore_collect([], knowledge.RandomPolicy(), 1)
