import zlib

import numpy as np


def make_rng(seed):
    """Accept a seed, a seed sequence or an existing Generator"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(*parts):
    """Stable integer seed from a mix of integers and strings"""
    entropy = []
    for part in parts:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode('utf-8')))
        else:
            entropy.append(int(part))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
