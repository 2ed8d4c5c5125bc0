"""Exception hierarchy shared by all finsat modules."""


class FinsatError(Exception):
    pass


class FormulaSyntaxError(FinsatError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ArityError(FinsatError, ValueError):
    pass


class UnknownSymbolError(FinsatError, ValueError):
    pass


class VocabularyError(FinsatError, ValueError):
    """A formula or structure does not fit the vocabulary an operation needs."""


class UnboundVariableError(FinsatError, ValueError):
    pass


class ResourceError(FinsatError):
    """A configured cap (automaton states, solver conflicts, size bound) was hit."""


class NotAModelError(FinsatError, ValueError):
    pass


class DecodeError(FinsatError, ValueError):
    pass


class MachineError(FinsatError, ValueError):
    """Malformed or invalid Turing machine description."""


class FragmentError(FinsatError):
    pass
