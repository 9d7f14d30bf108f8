"""Exception types. All derive from ``MvoccError`` so callers can catch one thing."""


class MvoccError(Exception):
    pass


class ConfigurationError(MvoccError, ValueError):
    pass


class AlignmentError(MvoccError, ValueError):
    pass


class ParseError(MvoccError, ValueError):
    pass


class StratificationError(MvoccError, ValueError):
    pass


class SplitError(MvoccError, ValueError):
    pass


class ParameterError(MvoccError, ValueError):
    pass


class ShapeError(MvoccError, ValueError):
    pass


class InfeasibleError(MvoccError, ValueError):
    """Box-constrained dual has no feasible point (C < 1/N)."""


class NumericError(MvoccError, ArithmeticError):
    pass


class DegenerateKernelError(MvoccError, ArithmeticError):
    pass


class DivergenceError(MvoccError, ArithmeticError):
    pass


class ContractError(MvoccError, ValueError):
    pass


class ProtocolError(MvoccError, RuntimeError):
    pass


class OracleScaleError(MvoccError, ValueError):
    pass
