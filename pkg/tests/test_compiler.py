import json
import pytest

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dmm_app.compiler import (GraphEdge, GraphNode, TransformerGraph, TransformShiftInterpreter, check_equivalence,
                              compile_graph, compile_network)
from dmm_app.errors import FanInError, GraphError, UnknownNeuronTypeError
from dmm_app.netfile import parse_network
from dmm_app.network import DmmEngine, NeuronId, neuron_value, run
from dmm_app.neuron_lib import EventFeed, default_registry, dmm_cons
from dmm_app.vvalue import ZERO, VValue, get_subtree, iter_leaves

from dmm_strategies import event_streams, transformer_graphs

def chain_graph():
    return TransformerGraph(
        [GraphNode('src', 'source'), GraphNode('id', 'identity')],
        [GraphEdge('src', 'single', 'id', 'single')],
    )

def test_empty_graph_compiles_to_zero():
    assert compile_graph(TransformerGraph()) == ZERO

def test_chain_has_one_weight():
    matrix = compile_graph(chain_graph())

    assert list(iter_leaves(matrix)) == [(('identity', 'id', 'single', 'source', 'src', 'single'), 1.0)]

def test_fan_in_is_rejected():
    graph = TransformerGraph(
        [GraphNode('a', 'source'), GraphNode('b', 'source'), GraphNode('sum', 'identity')],
        [GraphEdge('a', 'single', 'sum', 'x'), GraphEdge('b', 'single', 'sum', 'x')],
    )

    with pytest.raises(FanInError, match='accum'):
        compile_graph(graph)

def test_graph_errors():
    with pytest.raises(UnknownNeuronTypeError):
        compile_graph(TransformerGraph([GraphNode('a', 'lstm')]))

    with pytest.raises(GraphError):
        compile_graph(TransformerGraph([GraphNode('a', 'identity'), GraphNode('a', 'accum')]))

    with pytest.raises(GraphError):
        compile_graph(TransformerGraph([GraphNode('a', 'identity')], [GraphEdge('a', 'x', 'b', 'x')]))

    with pytest.raises(GraphError):
        TransformerGraph.from_json({'nodes': [{'name': 'a'}]})

    with pytest.raises(GraphError):
        TransformerGraph.from_json({'nodes': [], 'wires': []})

def test_graph_json_round_trip(networks_dir):
    document = json.loads((networks_dir / 'event_list_graph.json').read_text())
    graph = TransformerGraph.from_json(document)

    assert graph.to_json() == document
    assert [node.name for node in graph.nodes] == ['feed', 'list']

def test_event_list_matches_fold(networks_dir):
    graph = TransformerGraph.from_json(json.loads((networks_dir / 'event_list_graph.json').read_text()))
    events = [VValue({'single': {'click': 1}}), ZERO, VValue({'single': {'key': 1, 'shift': 1}}), VValue({'single': {'click': 2}})]

    feed = EventFeed(events)
    registry = default_registry(feed)
    engine = DmmEngine(registry, matrix=compile_graph(graph, registry), feed=feed)
    run(engine, len(events) + 1)

    folded = ZERO
    for event in events:
        folded = get_subtree(dmm_cons(VValue({'self': folded, 'signal': get_subtree(event, 'single')})), 'self')

    assert get_subtree(neuron_value(engine.outputs, NeuronId('dmm-cons', 'list')), 'self') == folded

def test_interpreter_follows_chain():
    feed = EventFeed([VValue({'single': {'v': 1}})])
    interpreter = TransformShiftInterpreter(chain_graph(), default_registry(feed), feed)

    interpreter.step()
    assert interpreter.current['src'] == VValue({'single': {'v': 1}})
    assert interpreter.current['id'] == ZERO

    interpreter.step()
    assert interpreter.current['id'] == VValue({'single': {'v': 1}})
    assert interpreter.tick == 2

def test_acyclic_pipeline_is_equivalent():
    graph = TransformerGraph(
        [GraphNode('src', 'source'), GraphNode('diff', 'symmetric-minus'), GraphNode('id', 'identity')],
        [
            GraphEdge('src', 'single', 'diff', 'x'),
            GraphEdge('diff', 'negative-difference', 'id', 'out'),
        ],
    )
    events = [VValue({'single': {'a': k, 'b': -k}}) for k in range(10)]

    report = check_equivalence(graph, events, 15)

    assert report.equal
    assert report.compared_ticks == 15

def test_cyclic_accumulator_is_equivalent():
    graph = TransformerGraph(
        [GraphNode('src', 'source'), GraphNode('acc', 'accum')],
        [GraphEdge('src', 'single', 'acc', 'delta'), GraphEdge('acc', 'single', 'acc', 'accum')],
    )
    events = [VValue({'single': {'a': k % 4}}) for k in range(20)]

    assert check_equivalence(graph, events, 25).equal

def test_gate_toggling_is_equivalent():
    graph = TransformerGraph(
        [GraphNode('src', 'source'), GraphNode('g', 'gate')],
        [GraphEdge('src', 'single', 'g', 'scalar'), GraphEdge('src', 'single', 'g', 'signal')],
    )
    events = [VValue({'single': {'number': k % 2, 'v': 3}}) for k in range(12)]

    report = check_equivalence(graph, events, 14)

    assert report.equal
    assert 'equivalent' in str(report)

def test_compile_network_is_loadable():
    document = compile_network(chain_graph(), seed=7)
    spec = parse_network(document, json.dumps(document), 'compiled')

    assert 'inputs' not in document
    assert compile_network(chain_graph(), events_path='events.jsonl')['inputs'] == 'events.jsonl'
    assert spec.seed == 7
    assert spec.matrix == compile_graph(chain_graph())

@given(transformer_graphs())
def test_compiled_weights(graph):
    matrix = compile_graph(graph)
    leaves = list(iter_leaves(matrix))

    assert len(leaves) == len(graph.edges)
    assert all(weight == 1.0 for _, weight in leaves)

@given(st.data())
def test_compile_ignores_edge_order(data):
    graph = data.draw(transformer_graphs())
    shuffled = TransformerGraph(graph.nodes, data.draw(st.permutations(graph.edges)))

    assert compile_graph(shuffled) == compile_graph(graph)

@settings(suppress_health_check=[HealthCheck.too_slow])
@given(transformer_graphs(), event_streams())
def test_compiled_graph_matches_interpreter(graph, events):
    report = check_equivalence(graph, events, 50)

    assert report.equal, str(report)
