class ScenarioError(Exception):
    pass


class ExpertPathError(Exception):
    pass


class PolicyError(Exception):
    pass


class GrammarError(Exception):
    pass


class ValidationError(Exception):
    pass


class BackendError(Exception):
    pass


class TranscriptExhausted(BackendError):
    pass


class TranscriptMismatch(BackendError):
    pass


class RemoteBackendError(BackendError):
    def __init__(self, message, retries):
        super(RemoteBackendError, self).__init__('{0} (after {1} retries)'.format(message, retries))
        self.retries = retries


class EmbeddingError(Exception):
    def __init__(self, message, retries=None):
        if retries is not None:
            message = '{0} (after {1} retries)'.format(message, retries)
        super(EmbeddingError, self).__init__(message)
        self.retries = retries


class MetricsError(Exception):
    pass


class ManifestError(Exception):
    pass


class KnowledgeError(Exception):
    pass


class EpisodeTerminated(Exception):
    """Raised inside an episode once a step or failure cap is hit"""
    def __init__(self, cause):
        super(EpisodeTerminated, self).__init__(cause)
        self.cause = cause
