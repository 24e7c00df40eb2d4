'''Self-referential mechanism: an accumulator neuron whose output is the network matrix.

Self takes the current matrix on :accum through a weight-1 self-loop and
additive updates from other neurons on :delta. Its output at tick t is the
matrix used for the down movement of tick t + 1, and any neuron wired to
Self's output reads that same matrix.
'''
import logging

from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

from .errors import InvalidValueError, MatrixShapeError, SelfShapeError
from .network import NeuronId, check_matrix, iter_matrix, matrix_entry, neuron_value
from .vvalue import VValue, canonicalize, from_terms, get_path, get_subtree, linear_comb

logger = logging.getLogger('dmm_app')

@dataclass(frozen=True)
class SelfConfig:

    self_id: NeuronId = NeuronId('accum', 'self')
    output_name: str = 'single'
    enabled: bool = True

    @staticmethod
    def from_json(
        data: Optional[Mapping],
        defaults: Optional[Mapping] = None,
    )-> 'SelfConfig':
        '''Network-file "self" block; missing fields fall back to the config defaults.'''

        defaults = defaults or {}
        data = data or {}

        unknown = set(data) - {'enabled', 'fn', 'neuron', 'output'}
        if unknown:
            raise InvalidValueError(f'unknown keys in self block: {sorted(unknown)}')

        enabled = data.get('enabled', False)
        if not isinstance(enabled, bool):
            raise InvalidValueError(f'self.enabled must be a boolean, got {enabled!r}')

        return SelfConfig(
            self_id=NeuronId(
                str(data.get('fn', defaults.get('SELF_FN', 'accum'))),
                str(data.get('neuron', defaults.get('SELF_NEURON', 'self'))),
            ),
            output_name=str(data.get('output', defaults.get('SELF_OUTPUT', 'single'))),
            enabled=enabled,
        )

    def to_json(
        self
    )-> dict:

        return {
            'enabled': self.enabled,
            'fn': self.self_id.fn_name,
            'neuron': self.self_id.neuron_name,
            'output': self.output_name,
        }

    @property
    def loop_path(
        self
    )-> Tuple[str, ...]:

        fn_name, neuron_name = self.self_id
        return matrix_entry(fn_name, neuron_name, 'accum', fn_name, neuron_name, self.output_name)

def extract_matrix(
    outputs: VValue,
    cfg: SelfConfig,
)-> VValue:
    '''Self's current output, checked to be a rank-6 matrix.'''

    matrix = get_subtree(neuron_value(outputs, cfg.self_id), cfg.output_name)

    try:
        check_matrix(matrix)
    except MatrixShapeError as e:
        logger.error(f'Self output of {cfg.self_id} is not a network matrix: {e}')
        raise SelfShapeError(f'Self neuron {cfg.self_id} emits a value that is not a rank-6 matrix: {e}') from e

    return matrix

def bootstrap_self(
    matrix: VValue,
    cfg: SelfConfig,
    install_self_loop: bool = True,
)-> Tuple[VValue, VValue]:
    '''Initial outputs with Self emitting W0, and W0 carrying Self's weight-1 loop.'''

    matrix = check_matrix(canonicalize(matrix))

    if install_self_loop:
        current = get_path(matrix, cfg.loop_path)
        if current != 1.0:
            matrix = linear_comb([(1.0, matrix), (1.0 - current, from_terms([(cfg.loop_path, 1.0)]))])

    outputs = VValue({cfg.self_id.fn_name: {cfg.self_id.neuron_name: {cfg.output_name: matrix}}})

    logger.info(f'Self {cfg.self_id} bootstrapped with {len(list(iter_matrix(matrix)))} weights')

    return outputs, matrix

def merge_outputs(
    initial_outputs: VValue,
    self_outputs: VValue,
    cfg: SelfConfig,
)-> VValue:
    '''Initial outputs with Self's entry replaced by the bootstrap value.'''

    merged = {}
    for fn_name in initial_outputs.labels():
        for neuron_name in initial_outputs[fn_name].labels():
            if (fn_name, neuron_name) != tuple(cfg.self_id):
                merged.setdefault(fn_name, {})[neuron_name] = initial_outputs[fn_name][neuron_name]

    self_value = neuron_value(self_outputs, cfg.self_id)
    if len(self_value) > 0:
        merged.setdefault(cfg.self_id.fn_name, {})[cfg.self_id.neuron_name] = self_value

    return VValue(merged)
