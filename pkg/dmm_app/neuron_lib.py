'''Built-in activation functions.

Every builtin maps U to U: the first-level labels of its input name its
arguments and the first-level labels of its output name its results. Missing
arguments read as the zero vector.
'''
import logging

from typing import Callable, Dict, Iterable, List, Mapping, Optional

from .errors import InvalidValueError
from .network import BuiltinSpec, NeuronRegistry
from .vvalue import ZERO, VValue, add, get_number, get_subtree, is_u, max_abs_leaf, scale, subtract

logger = logging.getLogger('dmm_app')

def identity_fn(
    input: VValue
)-> VValue:

    return input

def accum(
    input: VValue
)-> VValue:

    return VValue({'single': add(get_subtree(input, 'accum'), get_subtree(input, 'delta'))})

def symmetric_minus(
    input: VValue
)-> VValue:

    x = get_subtree(input, 'x')
    y = get_subtree(input, 'y')

    return VValue({'difference': subtract(x, y), 'negative-difference': subtract(y, x)})

def gate(
    input: VValue
)-> VValue:
    '''Multiply :signal by the scalar on :scalar; an absent scalar closes the gate.'''

    return VValue({'single': scale(get_number(input, ['scalar']), get_subtree(input, 'signal'))})

def is_nonzero(
    signal: VValue
)-> bool:

    return len(signal) > 0

def is_always(
    signal: VValue
)-> bool:

    return True

INTERESTING: Dict[str, Callable[[VValue], bool]] = {
    'nonzero': is_nonzero,
    'always': is_always,
}

def make_dmm_cons(
    interesting: Callable[[VValue], bool] = is_nonzero
)-> Callable[[VValue], VValue]:

    def dmm_cons(
        input: VValue
    )-> VValue:

        old_self = get_subtree(input, 'self')
        signal = get_subtree(input, 'signal')

        if interesting(signal):
            return VValue({'self': {'this': signal, 'rest': old_self}})

        return VValue({'self': old_self})

    return dmm_cons

dmm_cons = make_dmm_cons()

def first_fn(
    input: VValue
)-> VValue:

    return VValue({'single': get_subtree(get_subtree(input, 'list'), 'this')})

def rest_fn(
    input: VValue
)-> VValue:

    return VValue({'single': get_subtree(get_subtree(input, 'list'), 'rest')})

def max_norm_probe(
    input: VValue
)-> VValue:

    return VValue({'single': {'number': max_abs_leaf(get_subtree(input, 'signal'))}})

def sink(
    input: VValue
)-> VValue:
    '''Consumes its input; the engine records it in the trace.'''

    return ZERO

def list_items(
    value: VValue
)-> List[VValue]:
    '''Items of a :this/:rest list, newest first.'''

    items = []
    while len(value) > 0:
        items.append(get_subtree(value, 'this'))
        value = get_subtree(value, 'rest')

    return items

class EventFeed:
    '''Events consumed one per tick by every source neuron.'''

    def __init__(
        self,
        events: Iterable[VValue] = (),
    )-> None:

        self.events = []
        for number, event in enumerate(events, start=1):
            event = VValue(event)
            if not is_u(event):
                raise InvalidValueError(f'event {number} has a top-level leaf')
            self.events.append(event)

        self.position = -1

    def advance(
        self
    )-> None:

        self.position += 1

    def current(
        self
    )-> VValue:

        if 0 <= self.position < len(self.events):
            return self.events[self.position]

        return ZERO

    def source(
        self,
        input: VValue,
    )-> VValue:

        return self.current()

    def __len__(self):
        return len(self.events)

def char_events(
    text: str
)-> List[VValue]:

    return [VValue({'single': {char: 1}}) for char in text]

BUILTINS = [
    BuiltinSpec('identity', identity_fn, 'output equals input', 'any'),
    BuiltinSpec('accum', accum, '{:single (:accum + :delta)}', ':accum :delta -> :single'),
    BuiltinSpec('symmetric-minus', symmetric_minus, '{:difference x-y, :negative-difference y-x}', ':x :y -> :difference :negative-difference'),
    BuiltinSpec('gate', gate, '{:single scalar * signal}', ':scalar :signal -> :single'),
    BuiltinSpec('dmm-cons', dmm_cons, 'prepend interesting signals to the :self list', ':self :signal -> :self'),
    BuiltinSpec('first', first_fn, 'head of a :this/:rest list', ':list -> :single'),
    BuiltinSpec('rest', rest_fn, 'tail of a :this/:rest list', ':list -> :single'),
    BuiltinSpec('max-norm', max_norm_probe, 'largest absolute leaf of :signal', ':signal -> :single'),
    BuiltinSpec('sink', sink, 'external output, recorded in the trace', 'any -> nothing'),
]

def default_registry(
    feed: Optional[EventFeed] = None,
    neuron_types: Optional[Mapping[str, Mapping]] = None,
)-> NeuronRegistry:
    '''Builtins plus a source bound to the feed and any derived neuron types.'''

    registry = NeuronRegistry(BUILTINS)

    feed = feed if feed is not None else EventFeed()
    registry.register(BuiltinSpec('source', feed.source, 'emits the current event', 'nothing -> event'))

    for name, declaration in (neuron_types or {}).items():
        registry.register(derived_type(registry, name, declaration))

    return registry

def derived_type(
    registry: NeuronRegistry,
    name: str,
    declaration: Mapping,
)-> BuiltinSpec:

    base_name = declaration.get('base')
    base = registry.get(base_name)
    params = {key: value for key, value in declaration.items() if key != 'base'}

    if base_name == 'dmm-cons':
        predicate_name = params.pop('interesting', 'nonzero')
        if predicate_name not in INTERESTING:
            raise InvalidValueError(f'neuron type {name!r}: unknown predicate {predicate_name!r}, expected one of {sorted(INTERESTING)}')
        fn = make_dmm_cons(INTERESTING[predicate_name])
    else:
        fn = base.fn

    if params:
        raise InvalidValueError(f'neuron type {name!r}: unexpected parameters {sorted(params)} for base {base_name!r}')

    logger.debug(f'derived neuron type {name} from {base_name}')

    return BuiltinSpec(name, fn, f'{base.doc} ({name})', base.arity)

def builtin_names(
)-> List[str]:

    return sorted([spec.name for spec in BUILTINS] + ['source'])
