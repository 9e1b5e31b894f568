"""
selector.py: In-context example selection.

    Instructions are embedded, and the planner receives the pool examples
    whose instruction embeddings have the greatest cosine similarity with
    the task instruction.

    Pool files are JSON lists of {instruction, example, vector (optional)}.

"""
import abc
import functools
import logging
import re
import zlib

import numpy as np
from scipy.spatial.distance import cdist

from homestead import goals as goal_conditions
from homestead import grammar, oracles, scenarios, settings
from homestead.backends import post_with_retries
from homestead.exceptions import EmbeddingError
from homestead.utils import file_utils, import_utils, rng_utils

logger = logging.getLogger('homestead')


@functools.lru_cache(maxsize=4096)
def ngram_projection(seed, dimension, gram):
    """Fixed normal vector of one character n-gram"""
    rng = np.random.default_rng(rng_utils.derive_seed(seed, zlib.crc32(gram.encode('utf-8'))))
    projection = rng.normal(size=dimension)
    projection.flags.writeable = False
    return projection


class EmbeddingBackend(abc.ABC):
    kind = None
    dimension = None

    @abc.abstractmethod
    def embed(self, text):
        pass


class HashEmbeddingBackend(EmbeddingBackend):
    """
    Seeded random projection of character n-gram counts.

    Every n-gram owns a fixed normal vector derived from the seed and the
    n-gram's crc32, so the embedding is a pure function of the text.
    """
    kind = 'hash'

    def __init__(self, runtime_context=None, dimension=None, seed=None, ngram=None):
        self.dimension = dimension or getattr(runtime_context, 'EMBEDDING_DIMENSION', settings.EMBEDDING_DIMENSION)
        self.seed = seed if seed is not None else getattr(runtime_context, 'EMBEDDING_SEED', settings.EMBEDDING_SEED)
        self.ngram = ngram or getattr(runtime_context, 'EMBEDDING_NGRAM', settings.EMBEDDING_NGRAM)

    def ngrams(self, text):
        padded = ' {0} '.format(' '.join(re.findall(r'[a-z0-9]+', text.lower())))
        width = min(self.ngram, len(padded))
        return [padded[index:index + width] for index in range(len(padded) - width + 1)]

    def embed(self, text):
        vector = np.zeros(self.dimension)
        for gram in self.ngrams(text):
            vector += ngram_projection(self.seed, self.dimension, gram)
        return vector


class RemoteEmbeddingBackend(EmbeddingBackend):
    kind = 'remote'

    def __init__(self, runtime_context=None, endpoint=None, model=None):
        self.endpoint = endpoint or getattr(runtime_context, 'EMBEDDING_ENDPOINT', settings.EMBEDDING_ENDPOINT)
        self.model = model or getattr(runtime_context, 'REMOTE_MODEL', settings.REMOTE_MODEL)
        self.retries = getattr(runtime_context, 'REMOTE_RETRIES', settings.REMOTE_RETRIES)
        self.timeout = getattr(runtime_context, 'REMOTE_TIMEOUT', settings.REMOTE_TIMEOUT)

    def embed(self, text):
        document = post_with_retries(self.endpoint, {'model': self.model, 'input': text}, self.retries,
                                     self.timeout, error_class=EmbeddingError)
        try:
            return np.asarray(document['data'][0]['embedding'], dtype=float)
        except (KeyError, IndexError, TypeError):
            raise EmbeddingError('Unrecognised embedding response from {0}'.format(self.endpoint))


def make_embedding_backend(kind, runtime_context=None):
    backends = import_utils.import_registry(settings.EMBEDDING_BACKENDS)
    if kind not in backends:
        raise ValueError('Unknown embedding backend {0}; expected one of {1}'.format(kind, ', '.join(backends)))
    return backends[kind](runtime_context)


def embed(text, backend):
    if not text or not text.strip():
        raise ValueError('Cannot embed empty text')
    return np.asarray(backend.embed(text), dtype=float)


class PoolEntry:
    def __init__(self, instruction, example, vector=None):
        self.instruction = instruction
        self.example = example
        self.vector = None if vector is None else np.asarray(vector, dtype=float)

    def to_dict(self):
        document = {'instruction': self.instruction, 'example': self.example}
        if self.vector is not None:
            document['vector'] = [float(value) for value in self.vector]
        return document


class ExamplePool:
    def __init__(self, entries):
        self.entries = list(entries)
        dimensions = {len(entry.vector) for entry in self.entries if entry.vector is not None}
        if len(dimensions) > 1:
            raise ValueError('Pool embeddings disagree on dimension: {0}'.format(sorted(dimensions)))

    def __len__(self):
        return len(self.entries)

    def embedded(self, backend):
        """A copy whose entries all carry vectors; precomputed vectors are kept"""
        return ExamplePool([PoolEntry(entry.instruction, entry.example,
                                      entry.vector if entry.vector is not None else embed(entry.instruction, backend))
                            for entry in self.entries])

    def matrix(self):
        return np.vstack([entry.vector for entry in self.entries])

    @classmethod
    def read(cls, path):
        return cls([PoolEntry(entry['instruction'], entry['example'], entry.get('vector'))
                    for entry in file_utils.read_json(path)])

    def write(self, path):
        file_utils.write_json([entry.to_dict() for entry in self.entries], path)
        return path


class RankedExample:
    def __init__(self, entry, similarity, rank):
        self.entry = entry
        self.similarity = similarity
        self.rank = rank

    @property
    def example(self):
        return self.entry.example

    def __repr__(self):
        return 'RankedExample({0}, {1:.4f}, {2!r})'.format(self.rank, self.similarity, self.entry.instruction)


def cosine_similarities(query_vector, matrix):
    """Cosine similarity of the query with every row; zero-norm vectors score -1"""
    with np.errstate(invalid='ignore', divide='ignore'):
        similarities = 1.0 - cdist(np.atleast_2d(query_vector), np.atleast_2d(matrix), 'cosine').flatten()
    similarities[~np.isfinite(similarities)] = -1.0
    return similarities


def rank_vectors(query_vector, matrix, k):
    """Row indices of the k most similar rows, ties broken by row order"""
    if k < 1:
        raise ValueError('k must be at least 1')
    similarities = cosine_similarities(query_vector, matrix)
    order = np.argsort(-similarities, kind='stable')
    return order[:min(k, len(order))], similarities


def select_top_k(query, pool, k, backend):
    """The min(k, |pool|) pool entries most similar to the query, most similar first"""
    if not len(pool):
        raise ValueError('Cannot select from an empty example pool')
    pool = pool.embedded(backend)
    order, similarities = rank_vectors(embed(query, backend), pool.matrix(), k)
    return [RankedExample(pool.entries[index], float(similarities[index]), rank)
            for rank, index in enumerate(order, start=1)]


def example_text(instruction):
    task = oracles.parse_instruction(instruction)
    subtasks = oracles.template_plan(task)
    plan = grammar.SubtaskPlan(goal_conditions.TASK_TYPE_LABELS[task['task_type']],
                               'First {0}.'.format(', then '.join(subtasks)), subtasks)
    return 'Instruction: {0}\n{1}'.format(instruction, grammar.render_plan(plan))


def build_example_pool(episodes_per_task_type=None, seed_offset=None, backend=None):
    """Worked planner examples from generated scenarios, episodes_per_task_type for every task type"""
    episodes_per_task_type = episodes_per_task_type or settings.POOL_EPISODES_PER_TASK_TYPE
    seed_offset = settings.POOL_SEED_OFFSET if seed_offset is None else seed_offset
    entries = []
    for task_type in goal_conditions.TASK_TYPES:
        for index in range(episodes_per_task_type):
            document = scenarios.generate_document(task_type, seed_offset + index)
            instruction = document['task']['high_level']
            entries.append(PoolEntry(instruction, example_text(instruction)))
    pool = ExamplePool(entries)
    if backend is not None:
        pool = pool.embedded(backend)
    logger.info('Built example pool', extra_tags={'entries': len(pool)})
    return pool


@functools.lru_cache(maxsize=None)
def default_pool():
    return build_example_pool()
