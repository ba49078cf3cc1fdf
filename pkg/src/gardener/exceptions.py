"""Exception hierarchy.

Every error raised on purpose derives from :class:`GardenerError`. The
``exit_code`` attribute is what the CLI returns for it: 2 for usage
problems, 3 for bad input files or data, 4 for broken internal invariants.
"""


class GardenerError(Exception):
    exit_code = 3


class InputError(GardenerError):
    exit_code = 3


class UsageError(GardenerError):
    exit_code = 2


class InvariantViolation(GardenerError):
    exit_code = 4


# tensor_store
class ParseError(InputError):
    pass


class CorruptContainer(InputError):
    pass


class UnsupportedDtype(InputError):
    pass


class IoError(InputError):
    pass


# block_partition
class NoBlocksFound(InputError):
    pass


class NonContiguousBlocks(InputError):
    pass


class BlockNotFound(UsageError):
    pass


# stats_engine
class EmptyInput(InputError):
    pass


class InvalidBinCount(UsageError):
    pass


class NonFiniteWeight(InputError):
    pass


class DegenerateMagnitude(InputError):
    pass


class DegenerateKurtosis(InputError):
    pass


class NormalizationUndefined(InputError):
    pass


# ranking / pruner
class UnknownCriterion(UsageError):
    pass


class EmptySelection(UsageError):
    pass


class FullModelPrune(UsageError):
    pass


class PlanConflict(InputError):
    pass


# oracle_compare
class DuplicateOracleRow(InputError):
    pass


class NoBaseline(InputError):
    pass


class IncompleteOracle(InputError):
    pass


class ShapeError(UsageError):
    pass
