'''V-values: immutable sparse recursive maps with scalar or sample leaves.

A V-value is a finitary map from labels to V-values, extended with two
reserved keys: NUMBER holding a scalar leaf and SAMPLE holding a signed
sample leaf. The empty map is the zero vector. Every VValue instance is kept
in canonical form: no zero scalars, no empty submaps.
'''
import logging
import math
import numbers

from collections.abc import Mapping
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import InvalidScalarError, InvalidValueError, ReservedLabelError, UnsupportedLeafError
from .samples import Rng, SampleLeaf, exact_sum, stochastic_down_scalar

logger = logging.getLogger('dmm_app')

class Reserved(Enum):

    NUMBER = 'number'
    SAMPLE = 'sample'

    def __repr__(self):
        return self.name

NUMBER = Reserved.NUMBER
SAMPLE = Reserved.SAMPLE

RESERVED_NAMES = {reserved.value: reserved for reserved in Reserved}

Label = str
Path = Tuple[Label, ...]
Scalar = float

class VValue(Mapping):
    '''Canonical V-value. Construct from any V-value-like raw data.'''

    __slots__ = ('_entries', '_hash')

    def __init__(
        self,
        raw: Any = None,
    )-> None:

        if raw is None:
            entries = {}
        elif isinstance(raw, VValue):
            entries = raw._entries
        else:
            entries = _canonical_entries(raw, ())

        self._entries = entries
        self._hash = None

    @classmethod
    def _trusted(
        cls,
        entries: dict,
    )-> 'VValue':

        value = cls.__new__(cls)
        value._entries = entries
        value._hash = None

        return value

    def __getitem__(self, key):
        return self._entries[key]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self):
        from .views import render_literal
        return f'VValue({render_literal(self)})'

    def __add__(self, other):
        if not isinstance(other, Mapping):
            return NotImplemented
        return add(self, VValue(other))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Mapping):
            return NotImplemented
        return subtract(self, VValue(other))

    def __neg__(self):
        return scale(-1.0, self)

    def __mul__(self, other):
        if not _is_real(other):
            return NotImplemented
        return scale(other, self)

    __rmul__ = __mul__

    @property
    def number(
        self
    )-> float:

        return self._entries.get(NUMBER, 0.0)

    @property
    def sample(
        self
    )-> Optional[SampleLeaf]:

        return self._entries.get(SAMPLE)

    def labels(
        self
    )-> List[Label]:

        return [key for key in self._entries if isinstance(key, str)]

ZERO = VValue._trusted({})

def _is_real(
    value: Any
)-> bool:

    return isinstance(value, numbers.Real) and not isinstance(value, bool)

def check_scalar(
    value: Any,
    where: str = 'scalar',
)-> float:

    if not _is_real(value):
        raise InvalidScalarError(f'{where} must be a real number, got {value!r}')

    try:
        value = float(value)
    except OverflowError:
        raise InvalidScalarError(f'{where} is too large for a double')

    if not math.isfinite(value):
        raise InvalidScalarError(f'{where} must be finite, got {value!r}')

    return value

def check_label(
    label: Any
)-> Label:

    if isinstance(label, Reserved):
        raise ReservedLabelError(f'reserved label {label!r} cannot be used here')
    if not isinstance(label, str) or len(label) == 0:
        raise InvalidValueError(f'labels must be non-empty strings, got {label!r}')
    if label in RESERVED_NAMES:
        raise ReservedLabelError(f'label {label!r} is reserved')

    return label

def check_path(
    path: Sequence[Label]
)-> Path:

    if isinstance(path, str):
        raise InvalidValueError(f'a path is a sequence of labels, got the string {path!r}')

    return tuple(check_label(label) for label in path)

def _read_key(
    key: Any,
    path: Path,
):

    if isinstance(key, Reserved):
        return key
    if isinstance(key, str) and key in RESERVED_NAMES:
        return RESERVED_NAMES[key]
    if isinstance(key, str) and len(key) > 0:
        return key

    raise InvalidValueError(f'invalid key {key!r} at {_format_path(path)}')

def _format_path(
    path: Path
)-> str:

    return '/' + '/'.join(path)

def _canonical_entries(
    raw: Any,
    path: Path,
)-> dict:

    if isinstance(raw, VValue):
        return raw._entries

    if _is_real(raw):
        value = check_scalar(raw, f'leaf at {_format_path(path)}')
        return {NUMBER: value} if value != 0.0 else {}

    if isinstance(raw, SampleLeaf):
        return {SAMPLE: raw}

    if not isinstance(raw, Mapping):
        raise InvalidValueError(f'expected a map or a number at {_format_path(path)}, got {type(raw).__name__}')

    entries = {}
    for key, value in raw.items():
        key = _read_key(key, path)
        if key in entries:
            raise InvalidValueError(f'duplicate key {key!r} at {_format_path(path)}')

        if key is NUMBER:
            number = check_scalar(value, f'number leaf at {_format_path(path)}')
            if number != 0.0:
                entries[NUMBER] = number
        elif key is SAMPLE:
            entries[SAMPLE] = SampleLeaf.from_json(value)
        else:
            sub = _canonical_entries(value, path + (key,))
            if sub:
                entries[key] = VValue._trusted(sub)

    return entries

def zero(
)-> VValue:

    return ZERO

def canonicalize(
    raw: Any
)-> VValue:
    '''Prune zeros and empty submaps, promote bare numbers to NUMBER leaves.'''

    return VValue(raw)

def is_zero(
    value: Mapping
)-> bool:

    return len(value) == 0

def from_terms(
    terms: Sequence[Tuple[Sequence[Label], Scalar]]
)-> VValue:

    root = {}
    for path, coefficient in terms:
        path = check_path(path)
        coefficient = check_scalar(coefficient, f'coefficient of {_format_path(path)}')
        node = root
        for label in path:
            node = node.setdefault(label, {})
        node.setdefault(NUMBER, []).append(coefficient)

    return VValue._trusted(_collect_terms(root))

def _collect_terms(
    node: dict
)-> dict:

    entries = {}
    for key, value in node.items():
        if key is NUMBER:
            total = exact_sum(value, 'sum of terms')
            if total != 0.0:
                entries[NUMBER] = total
        else:
            sub = _collect_terms(value)
            if sub:
                entries[key] = VValue._trusted(sub)

    return entries

def to_terms(
    value: VValue
)-> List[Tuple[Path, Scalar]]:

    terms = []
    for path, leaf in iter_leaves(value):
        if isinstance(leaf, SampleLeaf):
            raise UnsupportedLeafError(f'sample leaf at {_format_path(path)} has no scalar term')
        terms.append((path, leaf))

    return terms

def iter_leaves(
    value: VValue,
    prefix: Path = (),
)-> Iterator[Tuple[Path, Union[Scalar, SampleLeaf]]]:
    '''Depth-first leaves: the node's own leaves first, then its labels in order.'''

    entries = value._entries
    if NUMBER in entries:
        yield prefix, entries[NUMBER]
    if SAMPLE in entries:
        yield prefix, entries[SAMPLE]
    for key, sub in entries.items():
        if isinstance(key, str):
            yield from iter_leaves(sub, prefix + (key,))

def _combine(
    pairs: List[Tuple[float, VValue]],
    rng: Optional[Rng],
)-> dict:

    entries = {}

    numbers = [(c, v._entries[NUMBER]) for c, v in pairs if NUMBER in v._entries]
    samples = [(c, v._entries[SAMPLE]) for c, v in pairs if SAMPLE in v._entries]

    if samples:
        if rng is None:
            raise UnsupportedLeafError('deterministic addition is undefined for sample leaves')
        leaf = stochastic_down_scalar(numbers + samples, rng)
        if isinstance(leaf, SampleLeaf):
            entries[SAMPLE] = leaf
    elif numbers:
        total = exact_sum(c * x for c, x in numbers)
        if total != 0.0:
            entries[NUMBER] = total

    grouped = {}
    for c, v in pairs:
        for key, sub in v._entries.items():
            if isinstance(key, str):
                grouped.setdefault(key, []).append((c, sub))

    for label, sub_pairs in grouped.items():
        sub = _combine(sub_pairs, rng)
        if sub:
            entries[label] = VValue._trusted(sub)

    return entries

def linear_comb(
    pairs: Sequence[Tuple[Scalar, Mapping]],
    rng: Optional[Rng] = None,
)-> VValue:
    '''Sum of c * v over the pairs.

    Without an rng, sample leaves raise UnsupportedLeafError; with one, the
    sample leaves meeting at a path are combined stochastically.
    '''

    checked = []
    for c, v in pairs:
        c = check_scalar(c, 'coefficient')
        v = v if isinstance(v, VValue) else VValue(v)
        if c != 0.0 and len(v) > 0:
            checked.append((c, v))

    if len(checked) == 0:
        return ZERO

    return VValue._trusted(_combine(checked, rng))

def add(
    a: VValue,
    b: VValue,
)-> VValue:

    return linear_comb([(1.0, a), (1.0, b)])

def subtract(
    a: VValue,
    b: VValue,
)-> VValue:

    return linear_comb([(1.0, a), (-1.0, b)])

def scale(
    c: Scalar,
    value: VValue,
)-> VValue:

    c = check_scalar(c, 'scale factor')
    if c == 0.0:
        return ZERO

    return linear_comb([(c, value)])

def get_subtree(
    value: VValue,
    label: Label,
)-> VValue:

    label = check_label(label)

    return value._entries.get(label, ZERO) if isinstance(value, VValue) else VValue(value).get(label, ZERO)

def _walk(
    value: VValue,
    path: Sequence[Label],
)-> VValue:

    for label in check_path(path):
        value = get_subtree(value, label)
        if len(value) == 0:
            break

    return value

def get_path(
    value: VValue,
    path: Sequence[Label],
)-> Union[Scalar, VValue]:
    '''Iterated get_subtree.

    An empty path returns the value itself. Otherwise a zero subtree reads
    as 0.0 and a pure scalar leaf as its number; anything else is returned
    as a V-value.
    '''

    path = check_path(path)
    if len(path) == 0:
        return value

    sub = _walk(value, path)
    if len(sub) == 0:
        return 0.0
    if len(sub) == 1 and NUMBER in sub:
        return sub[NUMBER]

    return sub

def get_number(
    value: VValue,
    path: Sequence[Label] = (),
)-> Scalar:

    return _walk(value, path).number

def is_u(
    value: Mapping
)-> bool:

    return NUMBER not in value and SAMPLE not in value and 'number' not in value and 'sample' not in value

def is_canonical(
    value: Any
)-> bool:
    '''Traversal check: no zero leaves, no empty submaps, well-typed leaves.'''

    if not isinstance(value, Mapping):
        return False

    for key, sub in value.items():
        if key is NUMBER:
            if not _is_real(sub) or sub == 0.0 or not math.isfinite(sub):
                return False
        elif key is SAMPLE:
            if not isinstance(sub, SampleLeaf):
                return False
        elif isinstance(key, str) and key not in RESERVED_NAMES:
            if len(sub) == 0 or not is_canonical(sub):
                return False
        else:
            return False

    return True

def prune_below(
    value: VValue,
    epsilon: float,
)-> VValue:
    '''Drop numeric leaves with magnitude below epsilon.'''

    def prune(entries):
        pruned = {}
        for key, sub in entries.items():
            if key is NUMBER:
                if abs(sub) >= epsilon:
                    pruned[key] = sub
            elif key is SAMPLE:
                pruned[key] = sub
            else:
                inner = prune(sub._entries)
                if inner:
                    pruned[key] = VValue._trusted(inner)
        return pruned

    return VValue._trusted(prune(value._entries))

def approx_equal(
    a: Mapping,
    b: Mapping,
    rel_tol: float = 1e-12,
    abs_tol: float = 0.0,
)-> bool:

    leaves_a = dict(iter_leaves(VValue(a)))
    leaves_b = dict(iter_leaves(VValue(b)))

    for path in set(leaves_a) | set(leaves_b):
        left = leaves_a.get(path, 0.0)
        right = leaves_b.get(path, 0.0)
        if isinstance(left, SampleLeaf) or isinstance(right, SampleLeaf):
            if left != right:
                return False
        elif not math.isclose(left, right, rel_tol=rel_tol, abs_tol=abs_tol):
            return False

    return True

def max_abs_leaf(
    value: VValue
)-> Scalar:

    return max((abs(leaf) for _, leaf in iter_leaves(value) if not isinstance(leaf, SampleLeaf)), default=0.0)

def leaf_count(
    value: VValue
)-> int:

    return sum(1 for _ in iter_leaves(value))

def leaf_depths(
    value: VValue
)-> set:

    return {len(path) for path, _ in iter_leaves(value)}

def to_json(
    value: VValue
)-> Dict[str, Any]:

    document = {}
    for key, sub in value._entries.items():
        if key is NUMBER:
            document['number'] = sub
        elif key is SAMPLE:
            document['sample'] = sub.to_json()
        else:
            document[key] = to_json(sub)

    return document

def from_json(
    document: Any
)-> VValue:

    return VValue(document)
