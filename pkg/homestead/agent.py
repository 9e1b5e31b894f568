"""
agent.py: The planner, observer, executor and skill loop.

    The planner splits the instruction into subtasks. For every subtask the
    observer describes the state, the executor picks a skill, the skill runs
    in the simulator and its outcome goes into short-term memory. A
    RequireReplan asks the planner again with the accumulated feedback and
    execution resumes at the first subtask of the new plan that has not
    been completed.

"""
import logging

from homestead import grammar, roles, skills
from homestead.backends import backend_for
from homestead.episode import Episode
from homestead.exceptions import EpisodeTerminated, ExpertPathError, GrammarError, ValidationError

logger = logging.getLogger('homestead')

SUCCESS = 'success'
PLAN_EXHAUSTED = 'plan exhausted'
REPLAN_LIMIT = 'replan limit'

_SUBTASK_DONE = 'done'
_SUBTASK_REPLAN = 'replan'
_SUBTASK_STEP_CAP = 'executor step cap'


def resume_index(subtasks, completed):
    """Length of the leading run of subtasks already completed in the same order"""
    index = 0
    while index < len(subtasks) and index < len(completed) and subtasks[index] == completed[index]:
        index += 1
    return index


class Agent:
    def __init__(self, scenario, backends, runtime_context, examples=(), episode_id=None):
        self.scenario = scenario
        self.backends = backends
        self.runtime_context = runtime_context
        self.examples = list(examples)
        self.episode = Episode(scenario, runtime_context, episode_id)
        self.catalog = skills.skill_catalog()
        self.memory = roles.ShortTermMemory()
        self.feedback = []
        self.error_message = None

    @property
    def trajectory(self):
        return self.episode.trajectory

    def ablated(self, name):
        return name in self.runtime_context.ablate

    def make_plan(self, replan_index):
        instruction = self.scenario.instruction
        fallback = False
        if self.ablated('planner'):
            plan = grammar.SubtaskPlan(instruction.label, '', [instruction.high_level])
        else:
            try:
                plan = roles.plan(instruction, self.examples, backend_for(self.backends, roles.PLANNER),
                                  self.feedback)
            except GrammarError as exception:
                logger.error('Planner output unusable: {0}'.format(exception), episode=self.episode)
                self.trajectory.parse_failures += 1
                plan = grammar.SubtaskPlan(instruction.label, '', [instruction.high_level])
                fallback = True
        self.trajectory.append('plan', t=self.episode.state.step_count, replan=replan_index, fallback=fallback,
                               **plan.to_dict())
        return plan

    def describe(self, subtask):
        bundle = self.episode.state_bundle(subtask, self.error_message)
        return roles.summarize(bundle, backend_for(self.backends, roles.OBSERVER),
                               identity=self.ablated('observer'))

    def run_subtask(self, subtask):
        self.memory.clear()
        for _ in range(self.runtime_context.MAX_EXECUTOR_STEPS):
            if self.episode.goal_status().success:
                return _SUBTASK_DONE
            description = self.describe(subtask)
            found = description.fields['previously_found_objects'] or []
            visible = description.fields['objects_in_current_view'] or []
            try:
                step = roles.executor_step(description, self.memory, subtask, self.catalog,
                                           backend_for(self.backends, roles.EXECUTOR), found, visible)
            except GrammarError as exception:
                self.trajectory.parse_failures += 1
                self.error_message = 'unreadable executor output: {0}'.format(exception)
                continue
            except ValidationError as exception:
                self.memory.add_invalid(exception.step, str(exception))
                self.error_message = str(exception)
                continue
            if step.is_finish:
                self.error_message = None
                return _SUBTASK_DONE
            outcome = skills.execute_skill(skills.SkillInvocation(step.skill, step.target), self.episode,
                                           self.runtime_context)
            self.memory.add(step, outcome)
            self.feedback.extend(outcome.feedback)
            if outcome.status == skills.REPLAN:
                self.error_message = None
                return _SUBTASK_REPLAN
            self.error_message = outcome.error_message
            if self.error_message is None and outcome.steps_taken:
                self.error_message = roles.detect_action_failure(self.episode.previous_obs, self.episode.last_obs,
                                                                 self.episode.last_action)
        logger.warning('Subtask hit the executor step cap', episode=self.episode, extra_tags={'subtask': subtask})
        return _SUBTASK_STEP_CAP

    def run(self, expert_length=None):
        completed = []
        replans = 0
        cause = None
        try:
            plan = self.make_plan(replans)
            while cause is None:
                replan_requested = False
                for subtask in plan.subtasks[resume_index(plan.subtasks, completed):]:
                    logger.info('Starting subtask: {0}'.format(subtask), episode=self.episode)
                    result = self.run_subtask(subtask)
                    if result == _SUBTASK_REPLAN:
                        replan_requested = True
                        break
                    completed.append(subtask)
                    if self.episode.goal_status().success:
                        break
                if self.episode.goal_status().success:
                    cause = SUCCESS
                elif not replan_requested:
                    cause = PLAN_EXHAUSTED
                elif replans >= self.runtime_context.MAX_REPLANS:
                    cause = REPLAN_LIMIT
                else:
                    replans += 1
                    plan = self.make_plan(replans)
        except EpisodeTerminated as exception:
            cause = exception.cause
        if expert_length is None:
            try:
                expert_length = self.scenario.expert_path_length()
            except ExpertPathError:
                logger.warning('Scenario has no expert trajectory', episode=self.episode)
        return self.episode.finish(cause, expert_length)


def run_agent(scenario, backends, runtime_context, examples=(), episode_id=None, expert_length=None):
    """Run one embodied episode and return its finished trajectory"""
    return Agent(scenario, backends, runtime_context, examples, episode_id).run(expert_length)
