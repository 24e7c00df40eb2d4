'''Reading and checking network, graph, events and V-value files.

Every loader collects diagnostics with the line of the offending JSON key
where it can be found and raises a single ValidationError. `validate_file`
and the run command go through the same loaders and the same engine
construction, so a file validates exactly when it can be run.
'''
import json
import logging

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .compiler import TransformerGraph
from .errors import DmmError, Diagnostic, UsageError, ValidationError, ViewParseError
from .network import ActivityRule, DmmEngine, check_matrix, check_state, iter_matrix, neurons_of
from .neuron_lib import EventFeed, char_events, default_registry
from .selfref import SelfConfig, bootstrap_self, merge_outputs
from .views import parse_literal
from .vvalue import VValue, is_u

logger = logging.getLogger('dmm_app')

FILE_KINDS = ('network', 'graph', 'events', 'vvalue')
NETWORK_KEYS = {'activity_rule', 'seed', 'matrix', 'initial_outputs', 'inputs', 'self', 'neuron_types'}
MAX_SEED = 2 ** 64

@dataclass
class NetworkSpec:

    source: str
    activity_rule: ActivityRule
    seed: int
    matrix: VValue
    initial_outputs: VValue
    self_config: SelfConfig
    events: List[VValue] = field(default_factory=list)
    events_path: Optional[Path] = None
    neuron_types: Dict[str, dict] = field(default_factory=dict)

def locate(
    text: str,
    keys: Sequence[str],
)-> Optional[int]:
    '''Line of the last key of a JSON path, searching each key after the previous one.'''

    position = 0
    found = None
    for key in keys:
        index = text.find(json.dumps(key), position)
        if index < 0:
            break
        found = index
        position = index + 1

    if found is None:
        return None

    return text.count('\n', 0, found) + 1

def json_path(
    keys: Sequence[str]
)-> str:

    return '$' + ''.join(f'.{key}' for key in keys)

def read_text(
    path: Union[str, Path]
)-> str:

    try:
        return Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise ValidationError(str(path), [Diagnostic(f'cannot read file: {e}')]) from e

def parse_json(
    text: str,
    source: str,
    line_offset: int = 0,
)-> Any:

    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(source, [Diagnostic(f'invalid JSON: {e.msg}', e.lineno + line_offset)]) from e

def read_json(
    path: Union[str, Path]
)-> Tuple[Any, str]:

    text = read_text(path)

    return parse_json(text, str(path)), text

class _Collector:
    '''Accumulates diagnostics for one file.'''

    def __init__(
        self,
        source: str,
        text: str = '',
    )-> None:

        self.source = source
        self.text = text
        self.diagnostics: List[Diagnostic] = []

    def add(
        self,
        message: str,
        keys: Sequence[str] = (),
        line: Optional[int] = None,
    )-> None:

        if line is None and keys:
            line = locate(self.text, keys)

        self.diagnostics.append(Diagnostic(message, line, json_path(keys)))

    def check(
        self
    )-> None:

        if self.diagnostics:
            for diagnostic in self.diagnostics:
                logger.error(f'{self.source}: {diagnostic}')
            raise ValidationError(self.source, self.diagnostics)

def load_events(
    path: Union[str, Path]
)-> List[VValue]:
    '''Events file: JSON Lines of U-values, or plain text read as one event per character.'''

    path = Path(path)
    text = read_text(path)

    if path.suffix == '.txt':
        return char_events(text)

    collector = _Collector(str(path), text)
    events = []
    for number, line in enumerate(text.split('\n'), start=1):
        if not line.strip():
            continue
        try:
            event = VValue(json.loads(line))
        except json.JSONDecodeError as e:
            collector.add(f'invalid JSON: {e.msg}', line=number)
            continue
        except DmmError as e:
            collector.add(str(e), line=number)
            continue
        if not is_u(event):
            collector.add('event has a top-level leaf', line=number)
            continue
        events.append(event)

    collector.check()

    logger.info(f'loaded {len(events)} events from {path}')

    return events

def _read_value(
    collector: _Collector,
    document: Mapping,
    key: str,
)-> VValue:

    try:
        return VValue(document.get(key, {}))
    except DmmError as e:
        collector.add(str(e), [key])
        return VValue()

def parse_network(
    document: Any,
    text: str,
    source: str,
    config: Optional[Mapping] = None,
    base_dir: Optional[Path] = None,
)-> NetworkSpec:

    config = config or {}
    collector = _Collector(source, text)

    if not isinstance(document, Mapping):
        collector.add('network file must hold a JSON object')
        collector.check()

    for key in sorted(set(document) - NETWORK_KEYS):
        collector.add(f'unknown key {key!r}', [key])

    activity_rule = ActivityRule.INPUT_OR_OUTPUT
    try:
        activity_rule = ActivityRule.parse(document.get('activity_rule', config.get('DEFAULT_ACTIVITY_RULE', 'input-or-output')))
    except DmmError as e:
        collector.add(str(e), ['activity_rule'])

    seed = document.get('seed', config.get('DEFAULT_SEED', 0))
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        collector.add(f'seed must be an unsigned 64-bit integer, got {seed!r}', ['seed'])
        seed = 0

    matrix = _read_value(collector, document, 'matrix')
    try:
        check_matrix(matrix)
    except DmmError as e:
        collector.add(str(e), ['matrix'])

    initial_outputs = _read_value(collector, document, 'initial_outputs')
    try:
        check_state(initial_outputs)
    except DmmError as e:
        collector.add(str(e), ['initial_outputs'])

    self_config = SelfConfig(enabled=False)
    if not isinstance(document.get('self', {}), Mapping):
        collector.add('self must be an object', ['self'])
    else:
        try:
            self_config = SelfConfig.from_json(document.get('self'), config)
        except DmmError as e:
            collector.add(str(e), ['self'])

    neuron_types = document.get('neuron_types', {})
    if not isinstance(neuron_types, Mapping) or not all(isinstance(d, Mapping) for d in neuron_types.values()):
        collector.add('neuron_types must map names to objects', ['neuron_types'])
        neuron_types = {}

    events_path = None
    events = []
    inputs = document.get('inputs')
    if inputs is not None:
        if not isinstance(inputs, str):
            collector.add('inputs must be a path to an events file', ['inputs'])
        else:
            events_path = (base_dir or Path('.')) / inputs

    collector.check()

    try:
        registry = default_registry(neuron_types=neuron_types)
    except DmmError as e:
        collector.add(str(e), ['neuron_types'])
        collector.check()

    for path, _ in iter_matrix(matrix):
        for fn_name in (path[0], path[3]):
            if fn_name not in registry:
                collector.add(f'unknown neuron type {fn_name!r} at /{"/".join(path)}', ['matrix', fn_name])
    for neuron in neurons_of(initial_outputs):
        if neuron.fn_name not in registry:
            collector.add(f'unknown neuron type {neuron.fn_name!r}', ['initial_outputs', neuron.fn_name])
    if self_config.enabled and self_config.self_id.fn_name not in registry:
        collector.add(f'unknown neuron type {self_config.self_id.fn_name!r} for Self', ['self', 'fn'])

    collector.check()

    if events_path is not None:
        events = load_events(events_path)

    return NetworkSpec(
        source=source,
        activity_rule=activity_rule,
        seed=seed,
        matrix=matrix,
        initial_outputs=initial_outputs,
        self_config=self_config,
        events=events,
        events_path=events_path,
        neuron_types=dict(neuron_types),
    )

def load_network(
    path: Union[str, Path],
    config: Optional[Mapping] = None,
    seed: Optional[int] = None,
    events_path: Optional[Union[str, Path]] = None,
)-> NetworkSpec:
    '''Network file plus command-line overrides for seed and events.'''

    path = Path(path)
    document, text = read_json(path)
    spec = parse_network(document, text, str(path), config, path.parent)

    if seed is not None:
        if not 0 <= seed < MAX_SEED:
            raise ValidationError(str(path), [Diagnostic(f'seed must be an unsigned 64-bit integer, got {seed}')])
        spec.seed = seed
    if events_path is not None:
        spec.events_path = Path(events_path)
        spec.events = load_events(events_path)

    logger.info(f'loaded network {path} ({len(list(iter_matrix(spec.matrix)))} weights, {len(spec.events)} events)')

    return spec

def prepare_engine(
    spec: NetworkSpec,
    prune_epsilon: float = 0.0,
)-> DmmEngine:
    '''Fresh registry and feed, Self bootstrap, engine construction.'''

    feed = EventFeed(spec.events)
    registry = default_registry(feed, spec.neuron_types)

    matrix = spec.matrix
    outputs = spec.initial_outputs
    if spec.self_config.enabled:
        self_outputs, matrix = bootstrap_self(matrix, spec.self_config)
        outputs = merge_outputs(outputs, self_outputs, spec.self_config)

    try:
        return DmmEngine(
            registry,
            matrix=matrix,
            outputs=outputs,
            seed=spec.seed,
            activity_rule=spec.activity_rule,
            self_config=spec.self_config if spec.self_config.enabled else None,
            feed=feed,
            prune_epsilon=prune_epsilon,
        )
    except DmmError as e:
        raise ValidationError(spec.source, [Diagnostic(str(e))]) from e

def load_graph(
    path: Union[str, Path]
)-> TransformerGraph:

    document, text = read_json(path)
    collector = _Collector(str(path), text)

    try:
        graph = TransformerGraph.from_json(document)
        graph.validate(default_registry())
    except DmmError as e:
        collector.add(str(e), ['edges'] if 'edge' in str(e) or 'input' in str(e) else ['nodes'])
        collector.check()

    logger.info(f'loaded graph {path} with {len(graph.nodes)} nodes')

    return graph

def load_vvalue(
    path: Union[str, Path]
)-> VValue:
    '''A V-value written as JSON or as a nested-map literal.'''

    text = read_text(path)

    try:
        document = json.loads(text)
    except json.JSONDecodeError as json_error:
        try:
            return parse_literal(text)
        except ViewParseError:
            raise ValidationError(str(path), [Diagnostic(f'invalid JSON: {json_error.msg}', json_error.lineno)]) from json_error

    try:
        return VValue(document)
    except DmmError as e:
        raise ValidationError(str(path), [Diagnostic(str(e), 1)]) from e

def detect_kind(
    path: Union[str, Path],
    document: Any = None,
)-> str:
    '''Events by suffix, graph when nodes or edges are present, any other JSON object is a network.

    A V-value written as a JSON object is only checked as one when asked
    for explicitly, so a network file with a mistyped key stays a network.
    '''

    path = Path(path)
    if path.suffix in ('.jsonl', '.txt'):
        return 'events'
    if isinstance(document, Mapping):
        if {'nodes', 'edges'} & set(document):
            return 'graph'
        return 'network'

    return 'vvalue'

def validate_file(
    path: Union[str, Path],
    config: Optional[Mapping] = None,
    kind: Optional[str] = None,
)-> str:
    '''Check a file of the given kind, or of the detected one; returns the kind, raises ValidationError.'''

    path = Path(path)
    if kind is None:
        kind = detect_kind(path)
        if kind != 'events':
            try:
                document = json.loads(read_text(path))
            except json.JSONDecodeError:
                # literal text; load_vvalue reports the JSON error if that fails too
                document = None
            kind = detect_kind(path, document)
    elif kind not in FILE_KINDS:
        raise UsageError(f'unknown file kind {kind!r}, expected one of {list(FILE_KINDS)}')

    if kind == 'events':
        load_events(path)
    elif kind == 'graph':
        load_graph(path)
    elif kind == 'network':
        prepare_engine(load_network(path, config))
    else:
        load_vvalue(path)

    logger.info(f'{path}: valid {kind} file')

    return kind
