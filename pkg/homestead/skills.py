"""
skills.py: The skill library.

    Each skill compiles one invocation into a bounded loop of policy calls
    and simulator steps. Skills are registered by dotted path in
    settings.SKILL_LIBRARY.

"""
import abc
import logging

import numpy as np

from homestead import logs, navigation, settings, world
from homestead import maps as semantic_maps
from homestead.exceptions import EpisodeTerminated, PolicyError, ValidationError
from homestead.utils import import_utils

logger = logging.getLogger('homestead')

DONE = 'done'
FAILED = 'failed'
REPLAN = 'replan-requested'

TARGET_NEVER_FOUND = 'target never found'
BUDGET_EXCEEDED = 'navigation budget exceeded'
APPLIANCE_ROLES = ('cleaning', 'heating', 'cooling')

# Goal selections in a row that produce no movement before navigation gives up
_MAX_IDLE_SELECTIONS = 16


class SkillInvocation:
    def __init__(self, skill, target=None):
        registry = _registry()
        if skill not in registry:
            raise ValidationError('{0} is not in the skill catalog'.format(skill))
        if registry[skill].arity == 1 and not target:
            raise ValidationError('{0} requires a target'.format(skill))
        if registry[skill].arity == 0 and target:
            raise ValidationError('{0} takes no target'.format(skill))
        self.skill = skill
        self.target = target

    def __eq__(self, other):
        return isinstance(other, SkillInvocation) and (self.skill, self.target) == (other.skill, other.target)

    def __repr__(self):
        return 'Play[{0}]'.format(self.skill if self.target is None else '{0}, {1}'.format(self.skill, self.target))


class SkillOutcome:
    def __init__(self, status, steps_taken=0, error_message=None, feedback=()):
        if status not in (DONE, FAILED, REPLAN):
            raise ValueError('Unknown skill status {0}'.format(status))
        if status == FAILED and not error_message:
            raise ValueError('Failed skill outcomes carry an error message')
        self.status = status
        self.steps_taken = steps_taken
        self.error_message = error_message
        self.feedback = list(feedback)

    @property
    def succeeded(self):
        return self.status == DONE

    def to_dict(self):
        return {'status': self.status, 'steps_taken': self.steps_taken, 'error': self.error_message,
                'feedback': list(self.feedback)}


class _BudgetExhausted(Exception):
    pass


class Skill(abc.ABC):
    arity = 1
    description = ''

    def __init__(self, runtime_context):
        self.runtime_context = runtime_context
        self._budget_end = None

    @property
    def skill_name(self):
        return self.__class__.__name__

    def run(self, episode, target=None):
        logger.info('Running {0}'.format(self.skill_name), episode=episode, extra_tags={'target': target})
        start = episode.state.step_count
        classes_before = episode.located_classes()
        episode.feedback = []
        self._budget_end = start + self.runtime_context.NAV_BUDGET
        try:
            outcome = self.do_skill(episode, target)
        except EpisodeTerminated:
            self._record(episode, target, SkillOutcome(FAILED, episode.state.step_count - start,
                                                       'episode terminated', episode.feedback))
            raise
        except _BudgetExhausted:
            outcome = self.budget_failure(episode, target)
        except (ValidationError, PolicyError) as exception:
            outcome = SkillOutcome(FAILED, error_message=str(exception))
        except Exception:
            logger.error(logs.format_exception(), episode=episode)
            outcome = SkillOutcome(FAILED, error_message='{0} raised an exception'.format(self.skill_name))
        outcome.steps_taken = episode.state.step_count - start
        new_classes = sorted(episode.located_classes() - classes_before - {world.WALL_CLASS})
        if new_classes:
            outcome.feedback.append('Found objects: {0}'.format(', '.join(new_classes)))
        outcome.feedback.extend(episode.feedback)
        self._record(episode, target, outcome)
        return outcome

    def _record(self, episode, target, outcome):
        episode.trajectory.append('skill', t=episode.state.step_count, skill=self.skill_name, target=target,
                                  **outcome.to_dict())

    @abc.abstractmethod
    def do_skill(self, episode, target):
        pass

    def budget_failure(self, episode, target):
        return SkillOutcome(FAILED, error_message=BUDGET_EXCEEDED)

    def act(self, episode, action):
        if episode.state.step_count >= self._budget_end:
            raise _BudgetExhausted()
        return episode.act(action, skill=self.skill_name)

    def navigate(self, episode, target_class=None):
        """
        Drive the agent towards target_class (or one exploration goal when None).

        Returns the final NavGoal once positioned, or None when an exploration
        goal was reached without locating the target.
        """
        goal, field, traversable, since = None, None, None, 0
        idle = 0
        while True:
            current = episode.traversability()
            changed = traversable is None or not np.array_equal(current, traversable)
            traversable = current
            if goal is None or not traversable[goal.cell]:
                reselect = True
            elif goal.kind == navigation.EXPLORATION:
                # Exploration goals are kept until reached unless the target shows up
                reselect = target_class is not None and _unplaced_instance_known(episode, target_class)
            else:
                reselect = changed or since >= self.runtime_context.REPLAN_INTERVAL
            if reselect:
                if target_class is None:
                    reachable = np.isfinite(navigation.fmm_distance_field(traversable, [episode.state.agent_cell]))
                    new_goal = navigation.NavGoal(navigation.exploration_goal(episode.explore_state, traversable,
                                                                              reachable), navigation.EXPLORATION)
                else:
                    new_goal = navigation.select_navigation_goal(episode.maps, target_class, episode.explore_state,
                                                                 episode.slice_mem, episode.state.agent_cell,
                                                                 self.runtime_context, episode.placed_tokens)
                if new_goal != goal or field is None or changed:
                    field = navigation.fmm_distance_field(traversable, [new_goal.cell])
                goal, since = new_goal, 0
            elif changed:
                field = navigation.fmm_distance_field(traversable, [goal.cell])

            if not np.isfinite(field[episode.state.agent_cell]):
                goal = None
                idle += 1
                if idle > _MAX_IDLE_SELECTIONS:
                    raise PolicyError('stranded')
                continue
            action = navigation.next_action(episode.state.pose, field,
                                            goal.target_cell if goal.kind != navigation.EXPLORATION else None,
                                            goal.pitch)
            if action is None:
                if goal.kind != navigation.EXPLORATION:
                    return goal
                if target_class is None:
                    return None
                # Exploration goal reached without seeing the target: pick the next one
                goal = None
                idle += 1
                if idle > _MAX_IDLE_SELECTIONS:
                    raise _BudgetExhausted()
                continue
            idle = 0
            self.act(episode, action)
            since += 1


class NavigateToObject(Skill):
    description = 'navigate to a found object (or search for it) and face it'

    def do_skill(self, episode, target):
        target_class = resolve_class(target)
        self.navigate(episode, target_class)
        return SkillOutcome(DONE)

    def budget_failure(self, episode, target):
        return _not_found_or_budget(episode, target)


class Explore(Skill):
    arity = 0
    description = 'walk to a sampled unexplored area of the room; requires no target'

    def do_skill(self, episode, target):
        self.navigate(episode, None)
        return SkillOutcome(DONE)


class LookAround(Skill):
    arity = 0
    description = 'turn around in place to look at the surroundings; requires no target'

    def do_skill(self, episode, target):
        for _ in range(len(world.HEADINGS)):
            self.act(episode, world.LowLevelAction('RotateRight'))
        return SkillOutcome(DONE)


class RequireReplan(Skill):
    arity = 0
    description = 'ask the planner for a new plan when the current one cannot be completed; requires no target'

    def do_skill(self, episode, target):
        return SkillOutcome(REPLAN)


class InteractionSkill(Skill):
    action_kind = None
    # Whether tokens put down earlier may be the target
    reuse_placed = True

    def do_skill(self, episode, target):
        target_class = resolve_class(target)
        if semantic_maps.locate(episode.maps, target_class, episode.use_supplementary) is None and \
                not self.runtime_context.AUTO_NAVIGATE:
            return SkillOutcome(FAILED, error_message=TARGET_NEVER_FOUND)
        goal = None
        if self.runtime_context.AUTO_NAVIGATE:
            goal = self.navigate(episode, target_class)
        token = self.choose_token(episode, target_class, goal)
        if token is None:
            return SkillOutcome(FAILED, error_message=TARGET_NEVER_FOUND)
        outcome = self.act(episode, world.LowLevelAction(self.action_kind, token))
        if outcome.error_message == world.NOT_VISIBLE and goal is not None:
            outcome = self.sweep_pitch(episode, token) or outcome
        if not outcome.success:
            return SkillOutcome(FAILED, error_message=outcome.error_message)
        self.after_success(episode, token, goal, target_class)
        return SkillOutcome(DONE)

    def choose_token(self, episode, target_class, goal):
        """The detection token of target_class at the cell being faced, preferring ones not put down earlier"""
        excluded = set() if self.reuse_placed else episode.placed_tokens
        located = semantic_maps.locate(episode.maps, target_class, episode.use_supplementary)
        if located is None:
            return None
        if goal is not None and goal.target_cell in located.tokens:
            cell = goal.target_cell
        else:
            cell = episode.state.front_cell()
            if cell not in located.tokens:
                cell = located.cell
        tokens = [token for token in located.tokens[cell] if token not in excluded]
        if not tokens:
            return None
        fresh = [token for token in tokens if token not in episode.placed_tokens]
        return (fresh or tokens)[0]

    def sweep_pitch(self, episode, token):
        """Retry the interaction at the other camera pitches"""
        for pitch in world.PITCHES:
            if pitch == episode.state.pitch:
                continue
            while episode.state.pitch != pitch:
                tilt = 'LookUp' if world.PITCHES.index(pitch) > world.PITCHES.index(episode.state.pitch) \
                    else 'LookDown'
                self.act(episode, world.LowLevelAction(tilt))
            outcome = self.act(episode, world.LowLevelAction(self.action_kind, token))
            if outcome.error_message != world.NOT_VISIBLE:
                return outcome
        return None

    def after_success(self, episode, token, goal, target_class):
        pass

    def budget_failure(self, episode, target):
        return _not_found_or_budget(episode, target)


class PickupObject(InteractionSkill):
    action_kind = 'PickupObject'
    description = 'pick up a found object; the agent can hold one object at a time'
    reuse_placed = False

    def after_success(self, episode, token, goal, target_class):
        episode.maps.relocate(token, None)
        episode.held_token = token


class PutObject(InteractionSkill):
    action_kind = 'PutObject'
    description = 'put the held object into or onto a found receptacle'

    def after_success(self, episode, token, goal, target_class):
        if episode.held_token is not None:
            episode.maps.relocate(episode.held_token, episode.maps.track_cells.get(token, episode.state.front_cell()))
            # Objects left in an appliance are collected again once transformed
            if not set(world.load_catalog()[target_class].roles) & set(APPLIANCE_ROLES):
                episode.placed_tokens.add(episode.held_token)
        episode.held_token = None


class OpenObject(InteractionSkill):
    action_kind = 'OpenObject'
    description = 'open a found openable object such as a fridge, cabinet, drawer or microwave'


class CloseObject(InteractionSkill):
    action_kind = 'CloseObject'
    description = 'close a found openable object'


class ToggleObjectOn(InteractionSkill):
    action_kind = 'ToggleObjectOn'
    description = 'switch on a found appliance such as a faucet, lamp or microwave'


class ToggleObjectOff(InteractionSkill):
    action_kind = 'ToggleObjectOff'
    description = 'switch off a found appliance'


class SliceObject(InteractionSkill):
    action_kind = 'SliceObject'
    description = 'slice a found object while holding a knife'

    def after_success(self, episode, token, goal, target_class):
        target_cell = goal.target_cell if goal is not None else episode.state.front_cell()
        episode.slice_mem = navigation.record_slice(episode.slice_mem, episode.state.agent_cell, token,
                                                    target_class, target_cell)


def resolve_class(target):
    object_class = world.canonical_class_name(target)
    if object_class is None:
        raise ValidationError('unknown object {0}'.format(target))
    return object_class


def _unplaced_instance_known(episode, target_class):
    located = semantic_maps.locate(episode.maps, target_class, episode.use_supplementary)
    return located is not None and \
        any(not set(tokens) <= episode.placed_tokens for tokens in located.tokens.values())


def _not_found_or_budget(episode, target):
    object_class = world.canonical_class_name(target or '')
    if object_class is None or \
            semantic_maps.locate(episode.maps, object_class, episode.use_supplementary) is None:
        return SkillOutcome(FAILED, error_message=TARGET_NEVER_FOUND)
    return SkillOutcome(FAILED, error_message=BUDGET_EXCEEDED)


def _registry():
    return import_utils.import_registry(settings.SKILL_LIBRARY)


def skill_catalog():
    """(name, arity, description) for every registered skill, in registry order"""
    return [(name, skill.arity, skill.description) for name, skill in _registry().items()]


def execute_skill(invocation, episode, runtime_context):
    skill = _registry()[invocation.skill](runtime_context)
    return skill.run(episode, invocation.target)
