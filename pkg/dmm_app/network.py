'''Two-stroke engine for DMMs with variadic neurons.

The network matrix is a rank-6 V-value indexed as
fn_in -> neuron_in -> input_name -> fn_out -> neuron_out -> output_name -> weight.
A network state is a V-value indexed as fn -> neuron -> U-value.
Each tick runs a linear down movement (matrix application) followed by an up
movement (activation functions applied to the assembled inputs).
'''
import logging

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple

from .errors import (ContractViolationError, DmmError, InvalidValueError, MatrixShapeError,
                     StateShapeError, UnknownNeuronTypeError)
from .samples import Rng, SampleLeaf
from .vvalue import (NUMBER, ZERO, VValue, canonicalize, check_scalar, get_subtree, is_u, iter_leaves, linear_comb,
                     prune_below)

logger = logging.getLogger('dmm_app')

MATRIX_RANK = 6

Activation = Callable[[VValue], VValue]

class NeuronId(NamedTuple):

    fn_name: str
    neuron_name: str

    def __str__(self):
        return f'{self.fn_name}:{self.neuron_name}'

class ActivityRule(Enum):

    INPUT_DRIVEN = 'input-driven'
    INPUT_OR_OUTPUT = 'input-or-output'

    @staticmethod
    def parse(
        name
    )-> 'ActivityRule':

        if isinstance(name, ActivityRule):
            return name

        normalized = str(name).strip().lower().replace('_', '-')
        for rule in ActivityRule:
            if rule.value == normalized:
                return rule

        raise InvalidValueError(f'unknown activity rule {name!r}, expected one of {[rule.value for rule in ActivityRule]}')

@dataclass(frozen=True)
class BuiltinSpec:

    name: str
    fn: Activation
    doc: str = ''
    arity: str = ''

class NeuronRegistry:
    '''Stable activation-function names mapped to functions U -> U.'''

    def __init__(
        self,
        specs: Iterable[BuiltinSpec] = (),
    )-> None:

        self._specs: Dict[str, BuiltinSpec] = {}
        self._frozen = False

        for spec in specs:
            self.register(spec)

    def register(
        self,
        spec: BuiltinSpec,
    )-> None:

        if self._frozen:
            raise DmmError(f'registry is frozen, cannot register {spec.name!r}')
        if spec.name in self._specs:
            raise DmmError(f'neuron type {spec.name!r} is already registered')

        self._specs[spec.name] = spec

    def freeze(
        self
    )-> 'NeuronRegistry':

        self._frozen = True
        return self

    @property
    def frozen(
        self
    )-> bool:

        return self._frozen

    def get(
        self,
        fn_name: str,
    )-> BuiltinSpec:

        try:
            return self._specs[fn_name]
        except KeyError:
            raise UnknownNeuronTypeError(f'unknown neuron type {fn_name!r}')

    def __contains__(self, fn_name):
        return fn_name in self._specs

    def names(
        self
    )-> List[str]:

        return sorted(self._specs)

def matrix_entry(
    fn_in: str,
    neuron_in: str,
    input_name: str,
    fn_out: str,
    neuron_out: str,
    output_name: str,
)-> Tuple[str, ...]:

    return (fn_in, neuron_in, input_name, fn_out, neuron_out, output_name)

def iter_matrix(
    matrix: VValue
)-> Iterator[Tuple[Tuple[str, ...], float]]:

    for path, weight in iter_leaves(matrix):
        yield path, weight

def check_matrix(
    matrix: VValue,
    error: type = MatrixShapeError,
)-> VValue:
    '''Strict rank-6 check: every leaf numeric and at depth exactly six.'''

    for path, leaf in iter_leaves(matrix):
        if isinstance(leaf, SampleLeaf):
            raise error(f'sample leaf in network matrix at /{"/".join(path)}')
        if len(path) != MATRIX_RANK:
            raise error(f'network matrix leaf at depth {len(path)} (expected {MATRIX_RANK}) at /{"/".join(path)}')

    return matrix

def check_state(
    state: VValue
)-> VValue:
    '''fn -> neuron -> U-value: no leaves in the first three levels.'''

    if not is_u(state):
        raise StateShapeError('network state has a top-level leaf')
    for fn_name in state.labels():
        per_fn = state[fn_name]
        if not is_u(per_fn):
            raise StateShapeError(f'network state has a leaf at /{fn_name}')
        for neuron_name in per_fn.labels():
            if not is_u(per_fn[neuron_name]):
                raise StateShapeError(f'neuron {fn_name}:{neuron_name} holds a value outside of U')

    return state

def neuron_value(
    state: VValue,
    neuron: NeuronId,
)-> VValue:

    return get_subtree(get_subtree(state, neuron.fn_name), neuron.neuron_name)

def neurons_of(
    state: VValue
)-> List[NeuronId]:

    return [NeuronId(fn_name, neuron_name) for fn_name in state.labels() for neuron_name in state[fn_name].labels()]

def build_state(
    values: Dict[NeuronId, VValue]
)-> VValue:
    '''fn -> neuron -> value, leaving out neurons whose value is zero.'''

    raw = {}
    for neuron, value in values.items():
        if len(value) > 0:
            raw.setdefault(neuron.fn_name, {})[neuron.neuron_name] = value

    return VValue(raw)

def down_movement(
    matrix: VValue,
    outputs: VValue,
    rng: Optional[Rng] = None,
)-> VValue:
    '''x[f][nf][i] = sum over g, ng, o of w[f][nf][i][g][ng][o] * y[g][ng][o].'''

    check_matrix(matrix)

    inputs = {}
    for fn_in in matrix.labels():
        for neuron_in in matrix[fn_in].labels():
            neuron_inputs = {}
            for input_name in matrix[fn_in][neuron_in].labels():
                row = matrix[fn_in][neuron_in][input_name]
                pairs = []
                for fn_out in row.labels():
                    out_fn = get_subtree(outputs, fn_out)
                    for neuron_out in row[fn_out].labels():
                        out_neuron = get_subtree(out_fn, neuron_out)
                        for output_name, weight_node in row[fn_out][neuron_out].items():
                            pairs.append((weight_node[NUMBER], get_subtree(out_neuron, output_name)))
                value = linear_comb(pairs, rng)
                if len(value) > 0:
                    neuron_inputs[input_name] = value
            if neuron_inputs:
                inputs.setdefault(fn_in, {})[neuron_in] = neuron_inputs

    return VValue(inputs)

def fire_set(
    matrix: VValue,
    inputs: VValue,
    rule: ActivityRule = ActivityRule.INPUT_OR_OUTPUT,
)-> FrozenSet[NeuronId]:
    '''Neurons taking part in the up movement.

    INPUT_DRIVEN fires the neurons present in the inputs map. INPUT_OR_OUTPUT
    also fires every neuron with a nonzero weight on one of its inputs or
    outputs, so source neurons start with a zero input.
    '''

    fired = set(neurons_of(inputs))

    if ActivityRule.parse(rule) is ActivityRule.INPUT_OR_OUTPUT:
        for path, _ in iter_matrix(matrix):
            fired.add(NeuronId(path[0], path[1]))
            fired.add(NeuronId(path[3], path[4]))

    return frozenset(fired)

def up_movement(
    registry: NeuronRegistry,
    inputs: VValue,
    fired: Iterable[NeuronId],
)-> VValue:
    '''y[f][nf] = f(x[f][nf]) for every fired neuron, in sorted order.'''

    outputs = {}
    for neuron in sorted(fired):
        activation = registry.get(neuron.fn_name).fn

        try:
            output = canonicalize(activation(neuron_value(inputs, neuron)))
        except DmmError:
            raise
        except Exception as e:
            raise ContractViolationError(f'activation of {neuron} failed: {e}') from e

        if not is_u(output):
            raise ContractViolationError(f'activation of {neuron} returned a top-level leaf')
        outputs[neuron] = output

    return build_state(outputs)

@dataclass
class TickRecord:

    tick: int
    matrix: VValue
    inputs: VValue
    outputs: VValue
    fired: FrozenSet[NeuronId]
    sinks: Dict[str, VValue] = field(default_factory=dict)

class DmmEngine:
    '''Holds registry, outputs, matrix, tick and rng of one run.

    With a positive prune_epsilon every numeric output leaf smaller in
    magnitude is dropped after the up movement; zero keeps outputs exact.
    '''

    def __init__(
        self,
        registry: NeuronRegistry,
        matrix: VValue = ZERO,
        outputs: VValue = ZERO,
        seed: int = 0,
        activity_rule: ActivityRule = ActivityRule.INPUT_OR_OUTPUT,
        self_config=None,
        feed=None,
        prune_epsilon: float = 0.0,
    )-> None:

        self.registry = registry.freeze()
        self.matrix = check_matrix(canonicalize(matrix))
        self.outputs = check_state(canonicalize(outputs))
        self.tick = 0
        self.seed = seed
        self.rng = Rng(seed)
        self.activity_rule = ActivityRule.parse(activity_rule)
        self.self_config = self_config
        self.feed = feed
        self.prune_epsilon = check_scalar(prune_epsilon, 'prune epsilon')
        if self.prune_epsilon < 0.0:
            raise InvalidValueError(f'prune epsilon must be non-negative, got {prune_epsilon}')
        self.last_record: Optional[TickRecord] = None

        if self.self_config is not None and self.self_config.enabled:
            from .selfref import extract_matrix
            self.matrix = extract_matrix(self.outputs, self.self_config)

        logger.info(f'engine ready ({len(list(iter_matrix(self.matrix)))} weights, seed {seed}, rule {self.activity_rule.value})')

    def step(
        self
    )-> 'DmmEngine':

        try:

            if self.self_config is not None and self.self_config.enabled:
                from .selfref import extract_matrix
                self.matrix = extract_matrix(self.outputs, self.self_config)

            inputs = down_movement(self.matrix, self.outputs, self.rng)
            fired = fire_set(self.matrix, inputs, self.activity_rule)

            if self.feed is not None:
                self.feed.advance()

            outputs = up_movement(self.registry, inputs, fired)
            if self.prune_epsilon > 0.0:
                outputs = prune_below(outputs, self.prune_epsilon)

        except DmmError as e:
            e.tick = self.tick
            e.add_note(f'while executing tick {self.tick}')
            logger.error(f'tick {self.tick} failed: {e}')
            raise

        sinks = {
            neuron.neuron_name: neuron_value(inputs, neuron)
            for neuron in sorted(fired) if neuron.fn_name == 'sink'
        }

        self.last_record = TickRecord(self.tick + 1, self.matrix, inputs, outputs, fired, sinks)
        self.outputs = outputs
        self.tick += 1

        logger.debug(f'tick {self.tick}: fired {len(fired)} neurons')

        return self

def step(
    engine: DmmEngine
)-> DmmEngine:

    return engine.step()

def run(
    engine: DmmEngine,
    n_steps: int,
    trace_sink=None,
)-> DmmEngine:
    '''Iterate step, handing every tick record to the trace sink.'''

    if n_steps < 0:
        raise InvalidValueError(f'number of steps must be non-negative, got {n_steps}')

    logger.info(f'run {n_steps} steps from tick {engine.tick}')

    if trace_sink is not None:
        trace_sink.start(engine)

    for _ in range(n_steps):
        engine.step()
        if trace_sink is not None:
            trace_sink.record(engine.last_record)

    logger.info(f'run finished at tick {engine.tick}')

    return engine
