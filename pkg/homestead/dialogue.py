"""
dialogue.py: Reasoner/actor dialogue in the text environment.

    The reasoner describes what to do next; the actor turns that advice
    into one environment command. Speakers alternate strictly, starting
    with the reasoner, and every utterance counts as one turn. The
    command's observation is appended to the history both speakers see.

"""
import logging

from homestead import knowledge as world_knowledge
from homestead import prompts, settings, textworld
from homestead.backends import backend_for
from homestead.exceptions import ExpertPathError
from homestead.trajectory import Trajectory

logger = logging.getLogger('homestead')

REASONER = 'reasoner'
ACTOR = 'actor'

SUCCESS = 'success'
FINISHED = 'finish'
TURN_CAP = 'turn cap'


class DialogueTurn:
    def __init__(self, speaker, content, grounded_action=None):
        if speaker not in (REASONER, ACTOR):
            raise ValueError('Unknown speaker {0}'.format(speaker))
        if speaker == ACTOR and grounded_action is None:
            raise ValueError('Actor turns carry a grounded action')
        if speaker == REASONER and grounded_action is not None:
            raise ValueError('Reasoner turns never carry an action')
        self.speaker = speaker
        self.content = content
        self.grounded_action = grounded_action

    def to_dict(self):
        return {'speaker': self.speaker, 'content': self.content, 'grounded_action': self.grounded_action}


def ground_command(completion):
    """First non-empty line of an actor completion, without a 'Command:' label"""
    for line in (completion or '').splitlines():
        line = line.strip()
        if line.lower().startswith('command:'):
            line = line[len('command:'):].strip()
        if line:
            return line.rstrip('.').lower()
    return ''


def _first_line(completion):
    for line in (completion or '').splitlines():
        if line.strip():
            return line.strip()
    return ''


def run_dialogue(scenario, knowledge_items, backends, turn_cap=None, episode_id=None):
    """
    Solve a scenario's task through reasoner/actor turns.

    backends is one CompletionBackend or a {role: backend} mapping with
    'reasoner' and 'actor' (or 'default') entries. Ends on goal success, an
    actor 'finish', or the turn cap.
    """
    turn_cap = settings.DIALOGUE_TURN_CAP if turn_cap is None else turn_cap
    env = textworld.TextEnvironment(scenario)
    knowledge_text = world_knowledge.render_knowledge(knowledge_items)
    header = {'scenario': scenario.name, 'task_type': scenario.instruction.task_type,
              'instruction': scenario.instruction.high_level, 'room_type': scenario.room_type,
              'goals': [goal.to_dict() for goal in scenario.goals],
              'goal_classes': scenario.goal_classes(), 'relevant_classes': scenario.relevant_classes(),
              'closed_goal_receptacles': scenario.closed_goal_receptacles(),
              'knowledge': [item.statement for item in knowledge_items],
              'config': {'mode': 'dialogue', 'turn_cap': turn_cap}}
    trajectory = Trajectory(episode_id or '{0}-dialogue'.format(scenario.name), header)

    observation = env.reset()
    history = ['Observation: {0}'.format(observation)]
    advice, turns, cause = None, 0, TURN_CAP
    while turns < turn_cap:
        speaker = REASONER if turns % 2 == 0 else ACTOR
        fields = {'knowledge': knowledge_text, 'task': env.task, 'history': '\n'.join(history),
                  'observation': observation}
        if speaker == REASONER:
            advice = _first_line(backend_for(backends, REASONER).complete(
                prompts.render_prompt(prompts.REASONER, **fields), REASONER))
            turn = DialogueTurn(REASONER, advice)
            history.append('Reasoner: {0}'.format(advice))
        else:
            command = ground_command(backend_for(backends, ACTOR).complete(
                prompts.render_prompt(prompts.ACTOR, advice=advice, **fields), ACTOR))
            turn = DialogueTurn(ACTOR, command, command)
            history.append('Actor: {0}'.format(command))
        turns += 1
        record = {'turn': turns}
        record.update(turn.to_dict())
        if speaker == ACTOR:
            if command == 'finish':
                trajectory.append('turn', **record)
                cause = FINISHED
                break
            observation = env.step(command)
            history.append('Observation: {0}'.format(observation))
            record['observation'] = observation
        trajectory.append('turn', **record)
        if env.goal_status().success:
            cause = SUCCESS
            break

    try:
        expert_length = textworld.expert_command_count(textworld.TextEnvironment(scenario))
    except ExpertPathError:
        logger.warning('No expert command sequence', extra_tags={'scenario': scenario.name})
        expert_length = None
    return trajectory.finish(env.goal_status(), cause, expert_length, env.commands)
