'''JSON Lines traces of engine runs.

The first record (tick 0) describes the run: seed, rng algorithm, activity
rule, initial outputs and initial matrix. Every step then appends the tick
reached, the outputs snapshot, sink inputs and, when it changed, the matrix
used during that step. Keys are sorted and separators compact so that equal
runs give byte-identical files.
'''
import hashlib
import json
import logging

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .errors import InvalidValueError
from .network import TickRecord
from .samples import RNG_ALGORITHM
from .vvalue import VValue, from_json, to_json

logger = logging.getLogger('dmm_app')

VVALUE_FIELDS = ('outputs', 'matrix')

def dumps(
    record: Dict[str, Any]
)-> str:

    return json.dumps(record, sort_keys=True, separators=(',', ':'), ensure_ascii=False)

def matrix_digest(
    matrix: VValue
)-> str:

    return hashlib.sha256(dumps(to_json(matrix)).encode('utf-8')).hexdigest()

class DmmTraceWriter:

    def __init__(
        self,
        path: Union[str, Path],
        snapshot_every: int = 0,
    )-> None:

        if snapshot_every < 0:
            raise InvalidValueError(f'snapshot_every must be non-negative, got {snapshot_every}')

        self.path = Path(path)
        self.snapshot_every = snapshot_every
        self.last_digest: Optional[str] = None
        self.records_written = 0

    def _write(
        self,
        record: Dict[str, Any],
        mode: str = 'a',
    )-> None:

        with self.path.open(mode, encoding='utf-8', newline='\n') as handle:
            handle.write(dumps(record) + '\n')

        self.records_written += 1

    def start(
        self,
        engine,
    )-> None:

        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.last_digest = matrix_digest(engine.matrix)
        self.records_written = 0

        self._write({
            'tick': engine.tick,
            'seed': engine.seed,
            'rng': RNG_ALGORITHM,
            'activity_rule': engine.activity_rule.value,
            'outputs': to_json(engine.outputs),
            'matrix': to_json(engine.matrix),
        }, mode='w')

        logger.info(f'trace started at {self.path}')

    def record(
        self,
        tick_record: TickRecord,
    )-> None:

        record = {
            'tick': tick_record.tick,
            'outputs': to_json(tick_record.outputs),
        }

        digest = matrix_digest(tick_record.matrix)
        periodic = self.snapshot_every > 0 and tick_record.tick % self.snapshot_every == 0
        if digest != self.last_digest or periodic:
            record['matrix'] = to_json(tick_record.matrix)
            self.last_digest = digest
            logger.debug(f'tick {tick_record.tick}: matrix snapshot written')

        if tick_record.sinks:
            record['sinks'] = {name: to_json(value) for name, value in tick_record.sinks.items()}

        self._write(record)

def read_trace(
    path: Union[str, Path]
)-> List[Dict[str, Any]]:
    '''Trace records with outputs, matrix and sink values decoded to V-values.'''

    records = []
    with Path(path).open('r', encoding='utf-8') as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            for key in VVALUE_FIELDS:
                if key in record:
                    record[key] = from_json(record[key])
            if 'sinks' in record:
                record['sinks'] = {name: from_json(value) for name, value in record['sinks'].items()}
            records.append(record)

    return records

def matrices_in_use(
    records: List[Dict[str, Any]]
)-> Dict[int, VValue]:
    '''Matrix used at each traced tick, carrying the last snapshot forward.'''

    current = VValue()
    used = {}
    for record in records:
        if 'matrix' in record:
            current = record['matrix']
        if record['tick'] > 0:
            used[record['tick']] = current

    return used
