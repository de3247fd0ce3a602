"""Exception hierarchy shared by all suget modules."""


class SugetError(Exception):
    """Base class for every error raised by the library."""


# -- parsing ---------------------------------------------------------------

class NewickError(SugetError, ValueError):
    """Malformed Newick input."""


class UnbalancedParens(NewickError):
    pass


class EmptyLabelOnLeaf(NewickError):
    pass


class DuplicateLeafLabel(NewickError):
    pass


class TrailingGarbage(NewickError):
    pass


class MissingSpecies(NewickError):
    pass


# -- trees -----------------------------------------------------------------

class TreeError(SugetError, ValueError):
    pass


class NonBinaryInput(TreeError):
    pass


class NodeNotInTree(TreeError):
    pass


class NotAncestor(TreeError):
    pass


class EmptyRestriction(TreeError):
    pass


class LeafNotPresent(TreeError):
    pass


class UnknownSpecies(TreeError):
    pass


class SharedGeneSpeciesMismatch(TreeError):
    pass


class InvalidLcaTriple(TreeError):
    pass


class UnlabeledNode(TreeError):
    pass


class InvalidLabeling(TreeError):
    """A Spec label sits on a node whose children are not separated in S."""


# -- solvers ---------------------------------------------------------------

class SolverError(SugetError):
    pass


class InconsistentInput(SolverError):
    pass


class NoLabelCompatibleSolution(SolverError):
    pass


class DegenerateDecomposition(SolverError):
    pass


class GraftNodeOutsideHost(SolverError):
    pass


class TooManyLeaves(SolverError):
    pass
