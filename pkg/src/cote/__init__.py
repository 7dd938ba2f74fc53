"""Compression of relational tree ensembles into single decision lists."""

from .compress import compress, ecote, predict, prep, scote
from .coverage import CoverageSet, ExampleSet, FactBase, satisfies
from .errors import CompressionAborted, CoteError, ParseError, SearchBudgetExceeded
from .logic import Atom, Clause, DecisionList, PredicateGroup, Term, const, var
from .subsumption import SearchBudget, theta_subsumes
from .trees import Inner, Leaf, TildeTree, eval_ensemble, tree_to_list

__version__ = "0.1.0"
