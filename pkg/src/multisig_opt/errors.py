"""Exception hierarchy shared by the solver, oracle and policy modules."""


class ModelError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedExponent(ModelError):
    """Closed forms are only derived for k = 2."""


class DivergentIntegral(ModelError):
    """A stage-weight integral does not converge on the requested interval."""


class CornerSolution(ModelError):
    """The requested quantity is undefined at a corner optimum (b <= a)."""


class DegenerateThresholds(ModelError):
    """Adjacent stage thresholds coincide, so the timelock is 0/0."""


class InvalidLogArgument(ModelError):
    """The timelock log argument is not strictly positive."""


class ZeroGamma(ModelError):
    """The attacker rate is zero; stage boundaries carry no information."""


class GammaNotBelowLambda(ModelError):
    """Growth-regime bound requires 0 < gamma < lambda."""


class NoFeasibleSchedule(ModelError):
    """Neither the fixed point nor the grid fallback produced a schedule."""


class CollisionUnresolvable(ModelError):
    """Stage activation times cannot be made strictly increasing."""


class InvalidParameter(ModelError, ValueError):
    """A parameter violates its type invariant."""
