'''Textual views of a V-value: term list, indented prefix tree, nested-map literal.

All three render functions have inverse parsers, so a value printed in any
view reads back as the same canonical V-value.
'''
import json
import re

from typing import List, Tuple

from .errors import ViewParseError
from .samples import SampleLeaf
from .vvalue import NUMBER, SAMPLE, VValue, check_scalar, from_terms, to_terms

_BARE_LABEL = re.compile(r'[^\s{}\[\]()<>,;"\\:~#]+')
_NUMBER = re.compile(r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?')

PATH_ARROW = '⤳'
INDENT = '  '

def format_scalar(
    value: float
)-> str:
    '''Integral values without a fractional part, others shortest round-trip.'''

    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))

    return repr(value)

def format_label(
    label: str
)-> str:

    if _BARE_LABEL.fullmatch(label):
        return ':' + label

    return json.dumps(label, ensure_ascii=False)

def _format_sample(
    leaf: SampleLeaf
)-> str:

    return '{:element ' + json.dumps(leaf.element, ensure_ascii=False) + ', :sign ' + str(leaf.sign) + '}'

def render_terms(
    value: VValue
)-> str:

    if len(value) == 0:
        return '{}'

    lines = []
    for path, coefficient in to_terms(value):
        lines.append(f'{format_scalar(coefficient)} * (' + ' '.join(format_label(label) for label in path) + ')')

    return '\n'.join(lines)

def render_tree(
    value: VValue
)-> str:

    if len(value) == 0:
        return '{}'

    lines = []

    def walk(node, depth):
        prefix = INDENT * depth
        if NUMBER in node:
            lines.append(f'{prefix}{PATH_ARROW} {format_scalar(node[NUMBER])}')
        if SAMPLE in node:
            lines.append(f'{prefix}{PATH_ARROW} sample {_format_sample(node[SAMPLE])}')
        for label in node.labels():
            lines.append(prefix + format_label(label))
            walk(node[label], depth + 1)

    walk(value, 0)

    return '\n'.join(lines)

def render_literal(
    value: VValue
)-> str:

    parts = []
    if NUMBER in value:
        parts.append(':number ' + format_scalar(value[NUMBER]))
    if SAMPLE in value:
        parts.append(':sample ' + _format_sample(value[SAMPLE]))
    for label in value.labels():
        sub = value[label]
        if len(sub) == 1 and NUMBER in sub:
            rendered = format_scalar(sub[NUMBER])
        else:
            rendered = render_literal(sub)
        parts.append(format_label(label) + ' ' + rendered)

    return '{' + ', '.join(parts) + '}'

class _Cursor:

    def __init__(
        self,
        text: str,
    )-> None:

        self.text = text
        self.position = 0

    def skip_space(
        self
    )-> None:

        while self.position < len(self.text) and (self.text[self.position].isspace() or self.text[self.position] == ','):
            self.position += 1

    def peek(
        self
    )-> str:

        self.skip_space()
        return self.text[self.position] if self.position < len(self.text) else ''

    def expect(
        self,
        char: str,
    )-> None:

        if self.peek() != char:
            self.fail(f'expected {char!r}')
        self.position += 1

    def fail(
        self,
        message: str,
    ):

        raise ViewParseError(f'{message} at offset {self.position}')

    def label(
        self
    )-> str:

        char = self.peek()
        if char == ':':
            match = _BARE_LABEL.match(self.text, self.position + 1)
            if match is None:
                self.fail('empty label')
            self.position = match.end()
            return match.group(0)
        if char == '"':
            try:
                label, end = json.JSONDecoder().raw_decode(self.text, self.position)
            except json.JSONDecodeError as e:
                raise ViewParseError(f'bad quoted label: {e}') from e
            self.position = end
            return label

        self.fail('expected a label')

    def number(
        self
    )-> float:

        self.skip_space()
        match = _NUMBER.match(self.text, self.position)
        if match is None:
            self.fail('expected a number')
        self.position = match.end()
        return check_scalar(float(match.group(0)))

    def at_end(
        self
    )-> bool:

        self.skip_space()
        return self.position >= len(self.text)

def _parse_sample(
    cursor: _Cursor
)-> SampleLeaf:

    cursor.expect('{')
    fields = {}
    while cursor.peek() != '}':
        key = cursor.label()
        if key == 'element':
            fields['element'] = cursor.label() if cursor.peek() == '"' else cursor.fail('expected a quoted element')
        elif key == 'sign':
            fields['sign'] = int(cursor.number())
        else:
            cursor.fail(f'unknown sample field {key!r}')
    cursor.expect('}')

    return SampleLeaf.from_json(fields)

def _parse_map(
    cursor: _Cursor
)-> dict:

    cursor.expect('{')
    raw = {}
    while cursor.peek() != '}':
        if cursor.peek() == '':
            cursor.fail('unterminated map')
        quoted = cursor.peek() == '"'
        key = cursor.label()
        if key in raw:
            cursor.fail(f'duplicate key {key!r}')
        if not quoted and key == 'number':
            raw[NUMBER] = cursor.number()
        elif not quoted and key == 'sample':
            raw[SAMPLE] = _parse_sample(cursor)
        elif cursor.peek() == '{':
            raw[key] = _parse_map(cursor)
        else:
            raw[key] = cursor.number()
    cursor.expect('}')

    return raw

def parse_literal(
    text: str
)-> VValue:

    cursor = _Cursor(text)
    raw = _parse_map(cursor)
    if not cursor.at_end():
        cursor.fail('trailing text')

    return VValue(raw)

def _parse_labels(
    text: str
)-> List[str]:

    cursor = _Cursor(text)
    labels = []
    while not cursor.at_end():
        labels.append(cursor.label())

    return labels

def parse_terms(
    text: str
)-> VValue:

    if text.strip() == '{}':
        return VValue()

    terms: List[Tuple[List[str], float]] = []
    for number, line in enumerate(text.split('\n'), start=1):
        if not line.strip():
            continue
        head, separator, rest = line.partition(' * (')
        if not separator or not rest.endswith(')'):
            raise ViewParseError(f'line {number}: expected "<coefficient> * (<labels>)"')
        try:
            coefficient = check_scalar(float(head))
        except ValueError as e:
            raise ViewParseError(f'line {number}: bad coefficient {head!r}') from e
        terms.append((_parse_labels(rest[:-1]), coefficient))

    return from_terms(terms)

def parse_tree(
    text: str
)-> VValue:

    if text.strip() == '{}':
        return VValue()

    root = {}
    stack = [root]
    for number, line in enumerate(text.split('\n'), start=1):
        if not line.strip():
            continue
        stripped = line.lstrip(' ')
        indent = len(line) - len(stripped)
        if indent % len(INDENT) != 0 or indent // len(INDENT) >= len(stack):
            raise ViewParseError(f'line {number}: bad indentation')
        del stack[indent // len(INDENT) + 1:]
        node = stack[-1]

        if stripped.startswith(PATH_ARROW):
            leaf = stripped[len(PATH_ARROW):].strip()
            if leaf.startswith('sample '):
                node[SAMPLE] = _parse_sample(_Cursor(leaf[len('sample '):]))
            else:
                cursor = _Cursor(leaf)
                node[NUMBER] = cursor.number()
                if not cursor.at_end():
                    raise ViewParseError(f'line {number}: trailing text after leaf')
        else:
            labels = _parse_labels(stripped)
            if len(labels) != 1:
                raise ViewParseError(f'line {number}: expected one label')
            child = {}
            node[labels[0]] = child
            stack.append(child)

    return VValue(root)
