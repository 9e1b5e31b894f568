"""
backends.py: Text-completion backends behind the planner, observer, executor, reasoner and actor.

    scripted  replays a recorded transcript exactly; running out of entries is an error
    oracle    deterministic rule policies (homestead.oracles), no language model involved
    remote    one text-in/text-out request per call to a hosted completion endpoint

"""
import abc
import logging
import os

import requests
from requests import ConnectionError, HTTPError, Timeout

from homestead import oracles, settings
from homestead.exceptions import RemoteBackendError, TranscriptExhausted, TranscriptMismatch
from homestead.utils import file_utils, import_utils

logger = logging.getLogger('homestead')

ROLES = ('planner', 'observer', 'executor', 'reasoner', 'actor', 'summarizer')


class CompletionBackend(abc.ABC):
    kind = None

    @classmethod
    def from_config(cls, runtime_context=None, transcript=None):
        return cls(runtime_context)

    @abc.abstractmethod
    def complete(self, prompt, role):
        pass


class ScriptedBackend(CompletionBackend):
    """
    Replays transcript entries {role, completion, prompt_digest (optional)} in order, per role.

    When an entry carries a prompt digest the md5 of the incoming prompt must
    match it.
    """
    kind = 'scripted'

    def __init__(self, entries):
        self.queues = {}
        for entry in entries:
            role = entry.get('role', 'executor')
            if role not in ROLES:
                raise ValueError('Unknown transcript role {0}'.format(role))
            self.queues.setdefault(role, []).append(entry)
        self.positions = {role: 0 for role in self.queues}
        self.calls = []

    @classmethod
    def from_file(cls, path):
        document = file_utils.read_json(path)
        if isinstance(document, dict):
            document = document.get('entries', [])
        return cls(document)

    @classmethod
    def from_config(cls, runtime_context=None, transcript=None):
        if transcript is None:
            raise ValueError('The scripted backend needs a transcript')
        if isinstance(transcript, str):
            return cls.from_file(transcript)
        return cls(transcript)

    def complete(self, prompt, role):
        queue = self.queues.get(role, [])
        position = self.positions.get(role, 0)
        if position >= len(queue):
            raise TranscriptExhausted('Transcript has no {0} entry left (used {1})'.format(role, position))
        entry = queue[position]
        expected = entry.get('prompt_digest')
        if expected is not None and expected != file_utils.text_digest(prompt):
            raise TranscriptMismatch('{0} prompt #{1} does not match the transcript'.format(role, position + 1))
        self.positions[role] = position + 1
        self.calls.append((role, file_utils.text_digest(prompt)))
        return entry['completion']

    def remaining(self, role=None):
        roles = [role] if role is not None else list(self.queues)
        return sum(len(self.queues.get(name, [])) - self.positions.get(name, 0) for name in roles)


class RuleOracleBackend(CompletionBackend):
    kind = 'oracle'

    def __init__(self, runtime_context=None):
        self.runtime_context = runtime_context

    def complete(self, prompt, role):
        return oracles.respond(role, prompt, self.runtime_context)


class RemoteBackend(CompletionBackend):
    kind = 'remote'

    def __init__(self, runtime_context=None, endpoint=None, model=None):
        self.endpoint = endpoint or getattr(runtime_context, 'COMPLETION_ENDPOINT', settings.COMPLETION_ENDPOINT)
        self.model = model or getattr(runtime_context, 'REMOTE_MODEL', settings.REMOTE_MODEL)
        self.retries = getattr(runtime_context, 'REMOTE_RETRIES', settings.REMOTE_RETRIES)
        self.timeout = getattr(runtime_context, 'REMOTE_TIMEOUT', settings.REMOTE_TIMEOUT)

    def complete(self, prompt, role):
        payload = {'model': self.model, 'prompt': prompt, 'temperature': 0, 'max_tokens': 512}
        return completion_text(post_with_retries(self.endpoint, payload, self.retries, self.timeout))


def authorization_headers():
    api_key = os.getenv(settings._API_KEY_VARIABLE)
    return {'Authorization': 'Bearer {0}'.format(api_key)} if api_key else {}


def post_with_retries(endpoint, payload, retries, timeout, error_class=RemoteBackendError):
    """POST payload as JSON, retrying on connection and HTTP errors, and return the decoded response"""
    for attempt in range(1, retries + 1):
        try:
            response = requests.post(endpoint, json=payload, headers=authorization_headers(), timeout=timeout)
            response.raise_for_status()
            return response.json()
        except (ConnectionError, Timeout):
            logger.warning('Endpoint unreachable', extra_tags={'endpoint': endpoint, 'attempt': attempt})
        except HTTPError:
            logger.warning('Endpoint returned an error', extra_tags={'endpoint': endpoint, 'attempt': attempt,
                                                                     'status': response.status_code})
        except ValueError:
            logger.warning('Endpoint returned malformed JSON', extra_tags={'endpoint': endpoint, 'attempt': attempt})
    raise error_class('Request to {0} failed'.format(endpoint), retries)


def completion_text(document):
    """Text of a completion response in either the completions or the chat response shape"""
    try:
        choice = document['choices'][0]
        if 'text' in choice:
            return choice['text']
        return choice['message']['content']
    except (KeyError, IndexError, TypeError):
        if isinstance(document, dict) and 'completion' in document:
            return document['completion']
        raise RemoteBackendError('Unrecognised completion response', 0)


def make_backend(kind, runtime_context=None, transcript=None):
    backends = import_utils.import_registry(settings.BACKENDS)
    if kind not in backends:
        raise ValueError('Unknown backend {0}; expected one of {1}'.format(kind, ', '.join(backends)))
    return backends[kind].from_config(runtime_context, transcript)


def backend_for(backends, role):
    """backends is either one backend for every role or a {role: backend} mapping"""
    if isinstance(backends, CompletionBackend):
        return backends
    if role in backends:
        return backends[role]
    return backends['default']
