from .closure import Carrier, ClosureOperator, IntersectionFamily, MonotoneOperator
from .extensions import ExtensionProblem, NaturalExtensionLattice, enumerate_natural_extensions
from .files import PresentationFile, StructureFile, WitnessFile
from .filters import AbstractFilterPairInstance, FilterSystem, all_filters, generated_filter
from .logic import LogicPresentation, Rule, SearchBounds, Verdict, derive
from .report import Report
from .search import Witness, search_counterexample
from .terms import FiniteStructure, Formula, Homomorphism, Signature, Substitution, VarSet
