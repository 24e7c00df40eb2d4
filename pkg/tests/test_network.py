import pytest

from hypothesis import given

from dmm_app.errors import (ContractViolationError, InvalidScalarError, InvalidValueError, MatrixShapeError,
                            MixedLeafError, StateShapeError, UnknownNeuronTypeError)
from dmm_app.network import (ActivityRule, BuiltinSpec, DmmEngine, NeuronId, NeuronRegistry, build_state,
                             check_matrix, check_state, down_movement, fire_set, iter_matrix, neuron_value, run, step,
                             up_movement)
from dmm_app.neuron_lib import EventFeed, accum, default_registry, symmetric_minus
from dmm_app.samples import Rng
from dmm_app.vvalue import ZERO, VValue, from_terms, get_subtree, iter_leaves, linear_comb

from dmm_strategies import matrices, small_ints, states

def brute_force_down(matrix, outputs):
    '''Triple sum over every nonzero matrix element, collected as terms.'''

    terms = []
    for (fn_in, neuron_in, input_name, fn_out, neuron_out, output_name), weight in iter_matrix(matrix):
        source = get_subtree(get_subtree(get_subtree(outputs, fn_out), neuron_out), output_name)
        for path, leaf in iter_leaves(source):
            terms.append(((fn_in, neuron_in, input_name) + path, weight * leaf))

    return from_terms(terms)

def accumulator_matrix():
    return from_terms([
        (('accum', 'total', 'accum', 'accum', 'total', 'single'), 1),
        (('accum', 'total', 'delta', 'source', 'feed', 'single'), 1),
    ])

def test_empty_matrix_gives_no_inputs():
    assert down_movement(ZERO, VValue({'accum': {'a': {'single': 1}}})) == ZERO

def test_weight_one_row_copies_stream():
    matrix = from_terms([(('identity', 'a', 'i', 'accum', 'b', 'o'), 1)])
    outputs = VValue({'accum': {'b': {'o': 5}}})

    assert down_movement(matrix, outputs) == VValue({'identity': {'a': {'i': 5}}})

def test_rows_sum_their_contributions():
    matrix = from_terms([
        (('identity', 'a', 'i', 'accum', 'b', 'o'), 2),
        (('identity', 'a', 'i', 'accum', 'c', 'o'), 3),
    ])
    outputs = VValue({'accum': {'b': {'o': 1}, 'c': {'o': 1}}})

    assert down_movement(matrix, outputs) == VValue({'identity': {'a': {'i': 5}}})

def test_mixed_leaves_in_one_row_fail():
    matrix = from_terms([
        (('identity', 'n', 'i', 'accum', 'p', 'o'), 1),
        (('identity', 'n', 'i', 'accum', 'q', 'o'), 1),
    ])
    outputs = VValue({'accum': {'p': {'o': {'sample': {'element': 'e', 'sign': 1}}}, 'q': {'o': 1}}})

    with pytest.raises(MixedLeafError):
        down_movement(matrix, outputs, Rng(0))

def test_matrix_shape_is_strict():
    with pytest.raises(MatrixShapeError):
        check_matrix(VValue({'a': {'b': {'c': {'d': {'e': 1}}}}}))

    with pytest.raises(MatrixShapeError):
        down_movement(VValue({'a': {'b': {'c': {'d': {'e': {'f': {'g': 1}}}}}}}), ZERO)

    with pytest.raises(MatrixShapeError):
        check_matrix(from_terms([(('a', 'b', 'c', 'd', 'e', 'f'), 1)]) + VValue({'a': 1}))

def test_state_shape():
    check_state(VValue({'accum': {'a': {'single': 1}}}))

    with pytest.raises(StateShapeError):
        check_state(VValue({'accum': {'a': 1}}))

    with pytest.raises(StateShapeError):
        check_state(VValue({'accum': 1}))

def test_fire_set_rules():
    inputs = VValue({'accum': {'n': {'delta': 1}}})
    matrix = from_terms([(('accum', 'n', 'delta', 'source', 'gen', 'single'), 1)])

    assert fire_set(ZERO, inputs, ActivityRule.INPUT_DRIVEN) == {NeuronId('accum', 'n')}
    assert NeuronId('source', 'gen') in fire_set(matrix, ZERO, ActivityRule.INPUT_OR_OUTPUT)
    assert NeuronId('source', 'gen') not in fire_set(matrix, ZERO, ActivityRule.INPUT_DRIVEN)
    assert fire_set(ZERO, ZERO, ActivityRule.INPUT_OR_OUTPUT) == frozenset()

def test_activity_rule_names():
    assert ActivityRule.parse('input-driven') is ActivityRule.INPUT_DRIVEN
    assert ActivityRule.parse('INPUT_OR_OUTPUT') is ActivityRule.INPUT_OR_OUTPUT

    with pytest.raises(InvalidValueError):
        ActivityRule.parse('sometimes')

def test_up_movement_examples():
    registry = default_registry()
    inputs = VValue({
        'accum': {'n': {'accum': {'x': 1}, 'delta': {'x': 2}}},
        'symmetric-minus': {'m': {'x': 5, 'y': 3}},
    })
    fired = [NeuronId('accum', 'n'), NeuronId('symmetric-minus', 'm')]

    outputs = up_movement(registry, inputs, fired)

    assert neuron_value(outputs, NeuronId('accum', 'n')) == VValue({'single': {'x': 3}})
    assert neuron_value(outputs, NeuronId('symmetric-minus', 'm')) == VValue({'difference': 2, 'negative-difference': -2})
    assert up_movement(registry, inputs, []) == ZERO

def test_up_movement_errors():
    registry = NeuronRegistry([
        BuiltinSpec('scalar', lambda input: VValue(1.0)),
        BuiltinSpec('broken', lambda input: 1 / 0),
    ])

    with pytest.raises(UnknownNeuronTypeError):
        up_movement(registry, ZERO, [NeuronId('missing', 'n')])

    with pytest.raises(ContractViolationError):
        up_movement(registry, ZERO, [NeuronId('scalar', 'n')])

    with pytest.raises(ContractViolationError):
        up_movement(registry, ZERO, [NeuronId('broken', 'n')])

def test_up_movement_is_local():
    registry = default_registry()
    inputs = VValue({'accum': {'a': {'delta': {'x': 1}}, 'b': {'delta': {'y': 2}}}})
    changed = VValue({'accum': {'a': {'delta': {'x': 100}}, 'b': {'delta': {'y': 2}}}})
    fired = [NeuronId('accum', 'a'), NeuronId('accum', 'b')]

    b = NeuronId('accum', 'b')
    assert neuron_value(up_movement(registry, inputs, fired), b) == neuron_value(up_movement(registry, changed, fired), b)

def test_step_with_empty_matrix_clears_outputs():
    engine = DmmEngine(default_registry(), outputs=VValue({'accum': {'a': {'single': 1}}}))

    step(engine)

    assert engine.outputs == ZERO
    assert engine.tick == 1

def test_accumulator_closed_form():
    deltas = [VValue({'single': {'x': k % 7, 'y': -(k % 3)}}) for k in range(100)]
    feed = EventFeed(deltas)
    engine = DmmEngine(default_registry(feed), matrix=accumulator_matrix(), feed=feed)

    total = ZERO
    for t in range(1, 101):
        engine.step()
        state = get_subtree(neuron_value(engine.outputs, NeuronId('accum', 'total')), 'single')
        assert state == total
        total = linear_comb([(1, total), (1, get_subtree(deltas[t - 1], 'single'))])

def test_prune_epsilon_drops_tiny_outputs():
    events = [VValue({'single': {'x': 1, 'y': 1e-15}})] * 4

    def total_after(prune_epsilon):
        feed = EventFeed(events)
        engine = DmmEngine(default_registry(feed), matrix=accumulator_matrix(), feed=feed, prune_epsilon=prune_epsilon)
        run(engine, 4)
        return get_subtree(neuron_value(engine.outputs, NeuronId('accum', 'total')), 'single')

    exact = total_after(0.0)
    pruned = total_after(1e-12)

    assert exact['y'].number > 0
    assert pruned.labels() == ['x']
    assert pruned['x'] == exact['x']

    with pytest.raises(InvalidValueError):
        DmmEngine(default_registry(), prune_epsilon=-1e-12)

def test_input_driven_sources_never_start():
    feed = EventFeed([VValue({'single': {'x': 1}})] * 3)
    engine = DmmEngine(default_registry(feed), matrix=accumulator_matrix(), feed=feed,
                       activity_rule=ActivityRule.INPUT_DRIVEN)

    run(engine, 5)

    assert engine.outputs == ZERO

def test_identity_chain_delay():
    k = 4
    terms = [(('identity', 'id1', 'single', 'source', 'feed', 'single'), 1)]
    terms += [(('identity', f'id{i + 1}', 'single', 'identity', f'id{i}', 'single'), 1) for i in range(1, k)]
    feed = EventFeed([VValue({'single': {'v': 1}})])
    engine = DmmEngine(default_registry(feed), matrix=from_terms(terms), feed=feed)

    last = NeuronId('identity', f'id{k}')
    run(engine, k)
    assert neuron_value(engine.outputs, last) == ZERO

    engine.step()
    assert neuron_value(engine.outputs, last) == VValue({'single': {'v': 1}})

def test_errors_carry_tick():
    registry = NeuronRegistry([BuiltinSpec('broken', lambda input: 1 / 0), BuiltinSpec('identity', lambda input: input)])
    matrix = from_terms([(('broken', 'b', 'x', 'identity', 'i', 'x'), 1)])
    engine = DmmEngine(registry, matrix=matrix)

    with pytest.raises(ContractViolationError) as excinfo:
        engine.step()

    assert excinfo.value.tick == 0
    assert any('tick 0' in note for note in excinfo.value.__notes__)

def test_overflowing_down_movement_carries_tick():
    matrix = from_terms([
        (('identity', 'n', 'i', 'accum', 'p', 'o'), 1),
        (('identity', 'n', 'i', 'accum', 'q', 'o'), 1),
    ])
    outputs = VValue({'accum': {'p': {'o': 1e308}, 'q': {'o': 1e308}}})
    engine = DmmEngine(default_registry(), matrix=matrix, outputs=outputs)

    with pytest.raises(InvalidScalarError, match='overflowed') as excinfo:
        engine.step()

    assert excinfo.value.tick == 0
    assert engine.tick == 0

def test_run_rejects_negative_steps():
    with pytest.raises(InvalidValueError):
        run(DmmEngine(default_registry()), -1)

def sampling_engine(seed):
    sample = lambda element: {'sample': {'element': element, 'sign': 1}}
    matrix = from_terms([
        (('identity', 'a', 'x', 'identity', 'a', 'x'), 1),
        (('identity', 'b', 'x', 'identity', 'b', 'x'), 1),
        (('identity', 'mix', 'x', 'identity', 'a', 'x'), 2),
        (('identity', 'mix', 'x', 'identity', 'b', 'x'), -1),
    ])
    outputs = VValue({'identity': {'a': {'x': sample('a')}, 'b': {'x': sample('b')}}})

    return DmmEngine(default_registry(), matrix=matrix, outputs=outputs, seed=seed)

def test_same_seed_same_run():
    first, second = sampling_engine(5), sampling_engine(5)

    for _ in range(30):
        first.step()
        second.step()
        assert first.outputs == second.outputs

    mixed = neuron_value(first.outputs, NeuronId('identity', 'mix'))
    assert mixed in (VValue({'x': {'sample': {'element': 'a', 'sign': 1}}}),
                     VValue({'x': {'sample': {'element': 'b', 'sign': -1}}}))

def test_registry_refuses_changes_after_engine_start():
    registry = default_registry()
    DmmEngine(registry)

    assert registry.frozen
    with pytest.raises(Exception):
        registry.register(BuiltinSpec('late', lambda input: input))

@given(matrices(), states())
def test_down_movement_matches_brute_force(matrix, outputs):
    assert down_movement(matrix, outputs) == brute_force_down(matrix, outputs)

@given(matrices(), states(), states(), small_ints, small_ints)
def test_down_movement_is_linear(matrix, y1, y2, alpha, beta):
    combined = linear_comb([(alpha, y1), (beta, y2)])
    expected = linear_comb([(alpha, down_movement(matrix, y1)), (beta, down_movement(matrix, y2))])

    assert down_movement(matrix, combined) == expected

@given(matrices(), states())
def test_inputs_stay_inside_matrix_support(matrix, outputs):
    inputs = down_movement(matrix, outputs)
    rows = {path[:3] for path, _ in iter_matrix(matrix)}

    assert {path[:3] for path, _ in iter_leaves(inputs)} <= rows

def test_build_state_skips_zero():
    state = build_state({NeuronId('accum', 'a'): VValue({'single': 1}), NeuronId('accum', 'b'): ZERO})

    assert state == VValue({'accum': {'a': {'single': 1}}})
