'''Signed samples and the stochastic linear combination of sample streams.

A stream of samples represents a stream of finite signed measures over a
discrete space of string tokens. A linear combination of several such
streams cannot be computed exactly, only represented by a new sample: index
i is picked with probability |a_i| / sum_j |a_j| and its flag is reversed
when a_i is negative.
'''
import logging
import math
import numpy as np

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from .errors import InvalidSampleError, InvalidScalarError, MixedLeafError

logger = logging.getLogger('dmm_app')

RNG_ALGORITHM = 'PCG64'

@dataclass(frozen=True)
class SampleLeaf:

    element: str
    sign: int = 1

    def __post_init__(
        self
    )-> None:

        if not isinstance(self.element, str) or len(self.element) == 0:
            raise InvalidSampleError(f'sample element must be a non-empty string, got {self.element!r}')
        if isinstance(self.sign, bool) or self.sign not in (-1, 1):
            raise InvalidSampleError(f'sample sign must be -1 or +1, got {self.sign!r}')

    def flipped(
        self
    )-> 'SampleLeaf':

        return SampleLeaf(self.element, -self.sign)

    def to_json(
        self
    )-> dict:

        return {'element': self.element, 'sign': self.sign}

    @staticmethod
    def from_json(
        data
    )-> 'SampleLeaf':

        if isinstance(data, SampleLeaf):
            return data
        if not isinstance(data, dict) or set(data.keys()) != {'element', 'sign'}:
            raise InvalidSampleError(f'sample leaf must be an object with element and sign, got {data!r}')
        sign = data['sign']
        if isinstance(sign, float) and sign.is_integer():
            sign = int(sign)
        return SampleLeaf(data['element'], sign)

class ZeroMark:
    '''The zero measure: no sample at all.'''

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return 'ZERO_MARK'

    def __bool__(self):
        return False

ZERO_MARK = ZeroMark()

@dataclass(frozen=True)
class WeightedSample:

    coefficient: float
    sample: SampleLeaf

    def __post_init__(
        self
    )-> None:

        if not math.isfinite(self.coefficient):
            raise InvalidScalarError(f'coefficient must be finite, got {self.coefficient!r}')

class Rng:
    '''Seeded PCG64 generator; one instance per engine run.'''

    def __init__(
        self,
        seed: int = 0,
    )-> None:

        if seed < 0 or seed >= 2 ** 64:
            raise ValueError(f'seed must be an unsigned 64-bit integer, got {seed}')

        self.seed = int(seed)
        self._seed_sequence = np.random.SeedSequence(self.seed)
        self._generator = np.random.Generator(np.random.PCG64(self._seed_sequence))

    @property
    def algorithm(
        self
    )-> str:

        return RNG_ALGORITHM

    def uniform(
        self
    )-> float:

        return float(self._generator.random())

    def pick_index(
        self,
        weights: Sequence[float],
    )-> int:
        '''Index i with probability weights[i] / sum(weights); weights are non-negative.'''

        cumulative = np.cumsum(np.asarray(weights, dtype=np.float64))
        total = cumulative[-1]
        index = int(np.searchsorted(cumulative, self.uniform() * total, side='right'))

        return min(index, len(cumulative) - 1)

def _sign(
    value: float
)-> int:

    return -1 if value < 0 else 1

def stochastic_linear_comb(
    inputs: Sequence[WeightedSample],
    rng: Rng,
)-> Union[SampleLeaf, ZeroMark]:

    terms = [term for term in inputs if term.coefficient != 0.0]
    if len(terms) == 0:
        return ZERO_MARK

    if len(terms) == 1:
        index = 0
    else:
        index = rng.pick_index([abs(term.coefficient) for term in terms])

    picked = terms[index]
    if picked.coefficient < 0:
        return picked.sample.flipped()

    return picked.sample

Leaf = Union[float, SampleLeaf]

def exact_sum(
    terms: Iterable[float],
    what: str = 'linear combination',
)-> float:
    '''Correctly rounded sum; overflow is an InvalidScalarError.'''

    try:
        total = math.fsum(terms)
    except (OverflowError, ValueError) as e:
        raise InvalidScalarError(f'{what} overflowed') from e

    if not math.isfinite(total):
        raise InvalidScalarError(f'{what} overflowed')

    return total

def stochastic_down_scalar(
    contributions: Sequence[Tuple[float, Leaf]],
    rng: Rng,
)-> Union[float, SampleLeaf, ZeroMark]:
    '''Combine the leaves reaching one path during a down movement.

    Numeric leaves are summed, sample leaves are combined stochastically.
    A path receiving both kinds is an error.
    '''

    numbers = [(weight, leaf) for weight, leaf in contributions if not isinstance(leaf, SampleLeaf)]
    samples = [(weight, leaf) for weight, leaf in contributions if isinstance(leaf, SampleLeaf)]

    if numbers and samples:
        raise MixedLeafError('a path received both numeric and sample contributions')

    if samples:
        return stochastic_linear_comb([WeightedSample(weight, leaf) for weight, leaf in samples], rng)

    return exact_sum(weight * leaf for weight, leaf in numbers)

def empirical_measure(
    draws: Iterable[SampleLeaf]
)-> Dict[str, float]:
    '''(count of positive - count of negative) / N per element.'''

    draws = list(draws)
    if len(draws) == 0:
        return {}

    counts = Counter()
    for draw in draws:
        counts[draw.element] += draw.sign

    return {element: count / len(draws) for element, count in counts.items()}

def draw_many(
    inputs: Sequence[WeightedSample],
    rng: Rng,
    n: int,
)-> List[Union[SampleLeaf, ZeroMark]]:

    logger.debug(f'drawing {n} samples from {len(inputs)} weighted inputs')

    return [stochastic_linear_comb(inputs, rng) for _ in range(n)]
