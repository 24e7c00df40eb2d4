import pytest

from dmm_app.errors import (Diagnostic, DmmError, FanInError, GraphError, MixedLeafError, UnknownNeuronTypeError,
                            UsageError, ValidationError)

def test_hierarchy():
    for error in (FanInError, MixedLeafError, UnknownNeuronTypeError, UsageError, ValidationError):
        assert issubclass(error, DmmError)

    assert issubclass(FanInError, GraphError)
    assert issubclass(MixedLeafError, TypeError)

def test_unknown_neuron_type_message():
    assert str(UnknownNeuronTypeError("unknown neuron type 'lstm'")) == "unknown neuron type 'lstm'"

    with pytest.raises(KeyError):
        raise UnknownNeuronTypeError('lstm')

def test_diagnostics():
    located = Diagnostic('unknown key', 3, '$.sed')
    error = ValidationError('net.json', [located, Diagnostic('cannot read file')])

    assert str(located) == 'line 3 ($.sed): unknown key'
    assert str(error) == 'net.json: line 3 ($.sed): unknown key; line ? ($): cannot read file'
    assert error.diagnostics[0] is located
