"""
episode.py: The per-episode owner of simulator state, maps, policy memory and trajectory.

    Every low-level action of an episode goes through Episode.act, which
    enforces the step and failure caps, fuses the next observation into the
    semantic maps and appends a step record.

"""
import logging

import numpy as np

from homestead import maps as semantic_maps
from homestead import navigation, world
from homestead.exceptions import EpisodeTerminated
from homestead.goals import check_goal
from homestead.trajectory import Trajectory
from homestead.utils import rng_utils

logger = logging.getLogger('homestead')

MAXIMUM_STEPS = 'maximum number of steps'
MAXIMUM_FAILURES = 'maximum number of failures'


def config_echo(runtime_context):
    """The run options that change an episode's outcome"""
    return {'backend': getattr(runtime_context, 'backend', 'oracle'),
            'seed': int(getattr(runtime_context, 'seed', 0)),
            'noise': getattr(runtime_context, 'noise', None),
            'ablate': sorted(getattr(runtime_context, 'ablate', ())),
            'top_k': runtime_context.TOP_K,
            'max_steps': runtime_context.MAX_STEPS,
            'max_failures': runtime_context.MAX_FAILURES,
            'nav_budget': runtime_context.NAV_BUDGET,
            'band_radius': runtime_context.BAND_RADIUS}


class Episode:
    def __init__(self, scenario, runtime_context, episode_id=None):
        self.scenario = scenario
        self.runtime_context = runtime_context
        self.episode_id = episode_id or scenario.name
        self.state = scenario.state.copy()
        seed = int(getattr(runtime_context, 'seed', 0))
        noise = scenario.noise
        if getattr(runtime_context, 'noise', None) is not None:
            noise = noise.with_mislabel(float(runtime_context.noise))
        self.noise = noise
        self.rng = np.random.default_rng([scenario.seed, seed])
        self.maps = semantic_maps.SemanticMaps(self.state.shape)
        self.explore_state = navigation.ExploreState(self.state.shape,
                                                     rng_utils.derive_seed(scenario.name, scenario.seed, seed))
        self.slice_mem = navigation.SliceMemory()
        self.failures = 0
        self.held_token = None
        self.placed_tokens = set()
        self.feedback = []
        self.previous_obs = None
        self.last_obs = None
        self.last_outcome = None
        self.last_action = None
        self.located_ever = False
        header = {'scenario': scenario.name, 'task_type': scenario.instruction.task_type,
                  'instruction': scenario.instruction.high_level, 'room_type': scenario.room_type,
                  'goals': [goal.to_dict() for goal in scenario.goals],
                  'goal_classes': scenario.goal_classes(), 'relevant_classes': scenario.relevant_classes(),
                  'closed_goal_receptacles': scenario.closed_goal_receptacles(),
                  'config': config_echo(runtime_context)}
        self.trajectory = Trajectory(self.episode_id, header)
        self.observe()

    @property
    def use_supplementary(self):
        return 'm-prime' not in self.runtime_context.ablate

    def observe(self):
        obs = world.observe(self.state, self.noise, self.rng)
        semantic_maps.update_maps(self.maps, obs, self.state.pose)
        self.explore_state.visit(self.state.agent_cell, self.maps.explored)
        self.previous_obs, self.last_obs = self.last_obs, obs
        return obs

    def goal_located(self):
        """Whether any goal class currently appears in either map"""
        located = self.located_classes()
        return any(object_class in located for object_class in self.scenario.goal_classes())

    def located_classes(self):
        return set(self.maps.known_classes(use_supplementary=True))

    def traversability(self):
        traversable = semantic_maps.traversability_grid(self.maps, self.runtime_context.OPTIMISTIC_UNKNOWN,
                                                        self.use_supplementary)
        traversable[self.state.agent_cell] = True
        return traversable

    def act(self, action, skill=None):
        """Execute one low-level action, observe, and record it"""
        if self.state.step_count >= self.runtime_context.MAX_STEPS:
            raise EpisodeTerminated(MAXIMUM_STEPS)
        front = self.state.front_cell()
        self.state, outcome = world.step(self.state, action)
        if not outcome.success:
            self.failures += 1
            if outcome.error_message == world.COLLISION:
                semantic_maps.mark_obstacle(self.maps, front)
            self.feedback.append('{0} failed: {1}'.format(action.kind, outcome.error_message))
            logger.debug('{0} failed: {1}'.format(action, outcome.error_message), episode=self)
        obs = self.observe()
        target = self.state.objects.get(action.target) if action.target is not None else None
        located = self.goal_located()
        self.located_ever = self.located_ever or located
        self.trajectory.append('step', t=self.state.step_count, digest=obs.rgb_digest, skill=skill,
                               action=action.kind, target=action.target,
                               target_class=None if target is None else target.object_class,
                               success=outcome.success, error=outcome.error_message,
                               error_kind=outcome.error_kind, goal_located=located)
        self.last_action, self.last_outcome = action, outcome
        if self.failures >= self.runtime_context.MAX_FAILURES:
            raise EpisodeTerminated(MAXIMUM_FAILURES)
        return outcome

    def goal_status(self):
        return check_goal(self.state, self.scenario.goals)

    def state_bundle(self, subtask=None, error_message=None):
        """Structured facts the observer turns into a state description"""
        held = self.state.held_object()
        return {'room_type': self.scenario.room_type,
                'task_description': self.scenario.instruction.high_level,
                'current_subtask': subtask or '',
                'previously_found_objects': self.maps.known_classes(self.use_supplementary),
                'objects_in_current_view': self.last_obs.classes() if self.last_obs is not None else [],
                'holding_object': None if held is None else held.object_class,
                'error_message': error_message}

    def finish(self, cause, expert_length=None):
        return self.trajectory.finish(self.goal_status(), cause, expert_length, self.state.step_count)
