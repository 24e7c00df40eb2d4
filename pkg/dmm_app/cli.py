'''Command-line front end: run, compile, validate, inspect.

Exit status: 0 on success, 1 on usage errors, 2 when a file does not
validate or cannot be read, 3 when a run fails.
'''
import argparse
import json
import logging
import math
import sys
import time

from collections import namedtuple
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

from . import __version__, init_config
from .compiler import check_equivalence, compile_network
from .errors import DmmError, UnsupportedLeafError, UsageError, ValidationError, ViewParseError
from .netfile import FILE_KINDS, load_events, load_graph, load_network, load_vvalue, prepare_engine, validate_file
from .network import run
from .trace import DmmTraceWriter
from .views import render_literal, render_terms, render_tree

logger = logging.getLogger('dmm_app')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

LOG_FORMAT = '%(asctime)s %(process)d %(module)s %(levelname)s: %(message)s'

VIEWS = {
    'terms': render_terms,
    'tree': render_tree,
    'literal': render_literal,
}

class Duration(namedtuple('Duration', 'hours, minutes, seconds')):

    def __str__(
        self
    )-> str:

        parts = [f'{value} {name}' for name, value in self._asdict().items() if value > 0 and name != 'seconds']
        parts.append(f'{self.seconds:.3f} seconds')

        return ', '.join(parts)

    @staticmethod
    def of(
        seconds: float
    )-> 'Duration':

        minutes, seconds = divmod(seconds, 60)
        hours, minutes = divmod(int(minutes), 60)

        return Duration(hours, minutes, seconds)

class DmmArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')

def positive_int(
    text: str
)-> int:

    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {text}')

    return value

def non_negative_int(
    text: str
)-> int:

    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f'expected a non-negative integer, got {text}')

    return value

def non_negative_float(
    text: str
)-> float:

    value = float(text)
    if not 0.0 <= value < math.inf:
        raise argparse.ArgumentTypeError(f'expected a finite non-negative number, got {text}')

    return value

def setup_logging(
    config
)-> None:
    '''Stream handler on stderr plus a rotating log file when LOG_FILE is set.'''

    logging.basicConfig(
        format=LOG_FORMAT,
        level=logging.DEBUG if config.DEBUG else config.LOG_LEVEL,
        stream=sys.stderr,
    )

    if config.LOG_FILE:
        handler = RotatingFileHandler(config.LOG_FILE, maxBytes=config.LOG_MAX_BYTES, backupCount=config.LOG_BACKUP_COUNT)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

def build_parser(
    config
)-> DmmArgumentParser:

    parser = DmmArgumentParser(prog='dmm', description='Run and inspect dataflow matrix machines.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=DmmArgumentParser)

    run_parser = subparsers.add_parser('run', help='run a network file and write a trace')
    run_parser.add_argument('network', type=str, help='network file (JSON)')
    run_parser.add_argument('--steps', type=positive_int, default=config.DEFAULT_STEPS, help='number of ticks')
    run_parser.add_argument('--seed', type=non_negative_int, default=None, help='override the seed of the network file')
    run_parser.add_argument('--trace', type=str, default=config.TRACE_FILE, help='trace output (JSON Lines)')
    run_parser.add_argument('--events', type=str, default=None, help='events file replacing the one of the network file')
    run_parser.add_argument('--snapshot-every', type=non_negative_int, default=config.SNAPSHOT_EVERY,
                            help='also write the matrix every K ticks (0 writes it on change only)')
    run_parser.add_argument('--prune-epsilon', type=non_negative_float, default=config.PRUNE_EPSILON,
                            help='drop output leaves smaller in magnitude after every tick (0 keeps them)')
    run_parser.set_defaults(handler=cmd_run)

    compile_parser = subparsers.add_parser('compile', help='compile a transformer graph into a network file')
    compile_parser.add_argument('graph', type=str, help='graph file (JSON)')
    compile_parser.add_argument('--out', type=str, default=None, help='network file to write (default stdout)')
    compile_parser.add_argument('--seed', type=non_negative_int, default=config.DEFAULT_SEED, help='seed stored in the network file')
    compile_parser.add_argument('--events', type=str, default=None, help='events file referenced by the network file')
    compile_parser.add_argument('--check', type=positive_int, default=None, metavar='STEPS',
                                help='compare against the transform-shift interpreter for STEPS ticks')
    compile_parser.set_defaults(handler=cmd_compile)

    validate_parser = subparsers.add_parser('validate', help='check a network, graph, events or V-value file')
    validate_parser.add_argument('file', type=str)
    validate_parser.add_argument('--kind', choices=['auto'] + list(FILE_KINDS), default='auto',
                                 help='file kind; auto reads any JSON object without nodes or edges as a network')
    validate_parser.set_defaults(handler=cmd_validate)

    inspect_parser = subparsers.add_parser('inspect', help='print a V-value in its textual views')
    inspect_parser.add_argument('file', type=str, help='V-value file (JSON or literal) or events file')
    inspect_parser.add_argument('--view', choices=['all'] + list(VIEWS), default='all')
    inspect_parser.set_defaults(handler=cmd_inspect)

    return parser

def cmd_run(
    args,
    config,
)-> int:

    spec = load_network(args.network, config, seed=args.seed, events_path=args.events)
    engine = prepare_engine(spec, args.prune_epsilon)

    start_time = time.time()
    run(engine, args.steps, DmmTraceWriter(args.trace, args.snapshot_every))
    logger.info(f'Run of {args.steps} ticks took {Duration.of(time.time() - start_time)}.')

    print(render_literal(engine.outputs))

    return EXIT_OK

def cmd_compile(
    args,
    config,
)-> int:

    graph = load_graph(args.graph)
    document = compile_network(graph, seed=args.seed, events_path=args.events)

    if args.check is not None:
        events = load_events(args.events) if args.events else []
        report = check_equivalence(graph, events, args.check)
        if not report.equal:
            logger.error(f'compiled network differs from the graph: {report}')
            print(str(report), file=sys.stderr)
            return EXIT_RUNTIME

    text = json.dumps(document, indent=2, sort_keys=True) + '\n'
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding='utf-8')
        logger.info(f'wrote network file {args.out}')

    return EXIT_OK

def cmd_validate(
    args,
    config,
)-> int:

    kind = validate_file(args.file, config, None if args.kind == 'auto' else args.kind)
    print(f'{args.file}: ok ({kind})')

    return EXIT_OK

def render_views(
    value,
    view: str = 'all',
)-> str:

    names = list(VIEWS) if view == 'all' else [view]

    sections = []
    for name in names:
        try:
            body = VIEWS[name](value)
        except UnsupportedLeafError as e:
            body = f'(not available: {e})'
        sections.append(f';; {name}\n{body}' if view == 'all' else body)

    return '\n'.join(sections)

def cmd_inspect(
    args,
    config,
)-> int:

    if Path(args.file).suffix in ('.jsonl', '.txt'):
        for number, event in enumerate(load_events(args.file), start=1):
            print(f';;; event {number}')
            print(render_views(event, args.view))
    else:
        print(render_views(load_vvalue(args.file), args.view))

    return EXIT_OK

def main(
    argv: Optional[List[str]] = None,
    config=None,
)-> int:

    config = config if config is not None else init_config()

    try:
        args = build_parser(config).parse_args(argv)
        return args.handler(args, config)

    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    except ValidationError as e:
        for diagnostic in e.diagnostics:
            print(f'{e.source}: {diagnostic}', file=sys.stderr)
        return EXIT_VALIDATION

    except (ViewParseError, OSError) as e:
        logger.error(f'cannot read input: {e}')
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION

    except DmmError as e:
        tick = getattr(e, 'tick', None)
        where = f' at tick {tick}' if tick is not None else ''
        logger.error(f'run failed{where}: {e}')
        print(f'error{where}: {e}', file=sys.stderr)
        return EXIT_RUNTIME
