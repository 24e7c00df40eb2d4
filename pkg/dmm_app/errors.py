'''Exception hierarchy of the DMM runtime.'''
from dataclasses import dataclass
from typing import List, Optional

class DmmError(Exception):
    '''Base class of every error raised by dmm_app.'''

class InvalidScalarError(DmmError, ValueError):
    pass

class ReservedLabelError(DmmError, ValueError):
    pass

class UnsupportedLeafError(DmmError, TypeError):
    pass

class MixedLeafError(DmmError, TypeError):
    pass

class InvalidSampleError(DmmError, ValueError):
    pass

class InvalidValueError(DmmError, ValueError):
    '''Raw data that cannot be read as a V-value.'''

class MatrixShapeError(DmmError, ValueError):
    pass

class StateShapeError(DmmError, ValueError):
    pass

class UnknownNeuronTypeError(DmmError, KeyError):

    def __str__(
        self
    )-> str:

        return str(self.args[0]) if self.args else 'unknown neuron type'

class ContractViolationError(DmmError):
    '''An activation function returned something outside of U.'''

class SelfShapeError(DmmError, ValueError):
    pass

class GraphError(DmmError, ValueError):
    pass

class FanInError(GraphError):
    pass

class ViewParseError(DmmError, ValueError):
    pass

class UsageError(DmmError):
    pass

@dataclass(frozen=True)
class Diagnostic:

    message: str
    line: Optional[int] = None
    path: str = '$'

    def __str__(
        self
    )-> str:

        location = f'line {self.line}' if self.line is not None else 'line ?'
        return f'{location} ({self.path}): {self.message}'

class ValidationError(DmmError):

    def __init__(
        self,
        source: str,
        diagnostics: List[Diagnostic],
    )-> None:

        self.source = source
        self.diagnostics = list(diagnostics)
        super().__init__(f'{source}: ' + '; '.join(str(d) for d in self.diagnostics))
