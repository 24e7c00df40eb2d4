'''Compile compositions of stream transformers into network matrices.

A transformer graph wires named outputs of nodes to named inputs of other
nodes. Each connection becomes one matrix element of weight 1, so the down
movement of the compiled network is exactly the shift of a transform-shift
interpreter running the same graph.
'''
import logging

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from .errors import DmmError, FanInError, GraphError
from .network import ActivityRule, DmmEngine, NeuronId, NeuronRegistry, matrix_entry, neuron_value
from .neuron_lib import EventFeed, default_registry
from .vvalue import ZERO, VValue, canonicalize, check_label, from_terms, get_subtree, is_u, to_json

logger = logging.getLogger('dmm_app')

@dataclass(frozen=True)
class GraphNode:

    name: str
    fn: str

@dataclass(frozen=True)
class GraphEdge:

    src_node: str
    output_name: str
    dst_node: str
    input_name: str

@dataclass
class TransformerGraph:

    nodes: List[GraphNode] = field(default_factory=list)
    edges: List[GraphEdge] = field(default_factory=list)

    def node_fn(
        self,
        name: str,
    )-> str:

        for node in self.nodes:
            if node.name == name:
                return node.fn

        raise GraphError(f'unknown node {name!r}')

    def active_nodes(
        self
    )-> List[GraphNode]:
        '''Nodes touching at least one edge, sorted by name.'''

        touched = {edge.src_node for edge in self.edges} | {edge.dst_node for edge in self.edges}

        return sorted((node for node in self.nodes if node.name in touched), key=lambda node: node.name)

    def validate(
        self,
        registry: NeuronRegistry,
    )-> 'TransformerGraph':

        names = set()
        for node in self.nodes:
            try:
                check_label(node.name)
            except DmmError as e:
                raise GraphError(f'bad node name {node.name!r}: {e}') from e
            if node.name in names:
                raise GraphError(f'duplicate node name {node.name!r}')
            names.add(node.name)
            registry.get(node.fn)

        wired = {}
        for edge in self.edges:
            for end in (edge.src_node, edge.dst_node):
                if end not in names:
                    raise GraphError(f'edge {edge} refers to unknown node {end!r}')
            for label in (edge.output_name, edge.input_name):
                try:
                    check_label(label)
                except DmmError as e:
                    raise GraphError(f'bad argument name in edge {edge}: {e}') from e

            key = (edge.dst_node, edge.input_name)
            if key in wired:
                raise FanInError(
                    f'input {edge.input_name!r} of node {edge.dst_node!r} is wired from both '
                    f'{wired[key].src_node}:{wired[key].output_name} and {edge.src_node}:{edge.output_name}; '
                    f'insert an accum node to sum them'
                )
            wired[key] = edge

        return self

    @staticmethod
    def from_json(
        document: Mapping
    )-> 'TransformerGraph':

        if not isinstance(document, Mapping):
            raise GraphError('graph document must be an object')

        unknown = set(document) - {'nodes', 'edges'}
        if unknown:
            raise GraphError(f'unknown keys in graph document: {sorted(unknown)}')

        try:
            nodes = [GraphNode(str(node['name']), str(node['fn'])) for node in document.get('nodes', [])]
            edges = []
            for edge in document.get('edges', []):
                (src_node, output_name), (dst_node, input_name) = edge['from'], edge['to']
                edges.append(GraphEdge(str(src_node), str(output_name), str(dst_node), str(input_name)))
        except (KeyError, TypeError, ValueError) as e:
            raise GraphError(f'malformed graph document: {e!r}') from e

        return TransformerGraph(nodes, edges)

    def to_json(
        self
    )-> dict:

        return {
            'nodes': [{'name': node.name, 'fn': node.fn} for node in self.nodes],
            'edges': [
                {'from': [edge.src_node, edge.output_name], 'to': [edge.dst_node, edge.input_name]}
                for edge in self.edges
            ],
        }

def compile_graph(
    graph: TransformerGraph,
    registry: Optional[NeuronRegistry] = None,
)-> VValue:
    '''One weight-1 matrix element per edge, nothing else.'''

    graph.validate(registry if registry is not None else default_registry())

    terms = []
    for edge in graph.edges:
        path = matrix_entry(
            graph.node_fn(edge.dst_node), edge.dst_node, edge.input_name,
            graph.node_fn(edge.src_node), edge.src_node, edge.output_name,
        )
        terms.append((path, 1.0))

    matrix = from_terms(terms)

    logger.info(f'compiled {len(graph.nodes)} nodes and {len(graph.edges)} edges')

    return matrix

def compile_network(
    graph: TransformerGraph,
    registry: Optional[NeuronRegistry] = None,
    seed: int = 0,
    events_path: Optional[str] = None,
)-> dict:
    '''Network-file document running the compiled graph.'''

    document = {
        'activity_rule': ActivityRule.INPUT_OR_OUTPUT.value,
        'seed': seed,
        'matrix': to_json(compile_graph(graph, registry)),
        'initial_outputs': {},
    }
    if events_path is not None:
        document['inputs'] = events_path

    return document

class TransformShiftInterpreter:
    '''Direct evaluator: every active node computes its next output from the
    current outputs, then all next outputs become current.'''

    def __init__(
        self,
        graph: TransformerGraph,
        registry: NeuronRegistry,
        feed: Optional[EventFeed] = None,
    )-> None:

        self.graph = graph.validate(registry)
        self.registry = registry
        self.feed = feed
        self.nodes = graph.active_nodes()
        self.incoming: Dict[str, List[GraphEdge]] = {}
        for edge in graph.edges:
            self.incoming.setdefault(edge.dst_node, []).append(edge)

        self.current: Dict[str, VValue] = {node.name: ZERO for node in self.nodes}
        self.tick = 0

    def node_input(
        self,
        name: str,
    )-> VValue:

        return VValue({
            edge.input_name: get_subtree(self.current[edge.src_node], edge.output_name)
            for edge in self.incoming.get(name, [])
        })

    def step(
        self
    )-> 'TransformShiftInterpreter':

        if self.feed is not None:
            self.feed.advance()

        upcoming = {}
        for node in self.nodes:
            output = canonicalize(self.registry.get(node.fn).fn(self.node_input(node.name)))
            if not is_u(output):
                raise GraphError(f'node {node.name!r} produced a top-level leaf')
            upcoming[node.name] = output

        self.current = upcoming
        self.tick += 1

        return self

@dataclass
class Divergence:

    tick: int
    node: str
    compiled: VValue
    interpreted: VValue

@dataclass
class EquivalenceReport:

    steps: int
    compared_ticks: int = 0
    divergence: Optional[Divergence] = None

    @property
    def equal(
        self
    )-> bool:

        return self.divergence is None

    def __str__(
        self
    )-> str:

        if self.equal:
            return f'equivalent for {self.compared_ticks} ticks'

        d = self.divergence
        return f'diverged at tick {d.tick} on node {d.node!r}: compiled {d.compiled!r} vs interpreted {d.interpreted!r}'

def check_equivalence(
    graph: TransformerGraph,
    events: Sequence[VValue],
    n_steps: int,
    neuron_types: Optional[Mapping[str, Mapping]] = None,
)-> EquivalenceReport:
    '''Run the compiled DMM and the transform-shift interpreter side by side.

    Both sides give every edge one tick of latency, so per-node traces are
    compared tick by tick without further alignment.
    '''

    compiled_feed = EventFeed(events)
    compiled_registry = default_registry(compiled_feed, neuron_types)
    engine = DmmEngine(
        compiled_registry,
        matrix=compile_graph(graph, compiled_registry),
        activity_rule=ActivityRule.INPUT_OR_OUTPUT,
        feed=compiled_feed,
    )

    interpreted_feed = EventFeed(events)
    interpreter = TransformShiftInterpreter(graph, default_registry(interpreted_feed, neuron_types), interpreted_feed)

    report = EquivalenceReport(steps=n_steps)
    for _ in range(n_steps):
        engine.step()
        interpreter.step()
        for node in interpreter.nodes:
            compiled = neuron_value(engine.outputs, NeuronId(node.fn, node.name))
            interpreted = interpreter.current[node.name]
            if compiled != interpreted:
                report.divergence = Divergence(engine.tick, node.name, compiled, interpreted)
                logger.info(f'equivalence check: {report}')
                return report
        report.compared_ticks += 1

    logger.info(f'equivalence check: {report}')

    return report
