"""Exact filtered comodule computations for G_a, U_N and GL_N over finite fields."""

from .coalgebra import (FiniteCoalgebra, SubspaceInAmbient, filtration_coalgebra,
                        generated_subcoalgebra, kernel_coalgebra)
from .comodule import (Comodule, GaOperatorModule, filtration_piece, hom_space,
                       largest_subcomodule, regular_comodule, socle_invariants, tensor,
                       trivial_comodule)
from .errors import (AmbiguousWindowError, ArtifactError, CapOverflowError, CrossCheckError,
                     NotCoalgebraMapError, UnsupportedModelError, ValidationError)
from .exactla import Field, get_field
from .frobsupport import (ga_injectivity_verdict, is_free, mock_injectivity_verdict,
                          restrict_to_kernel)
from .growth import CofiniteTypeEstimator, cofinite_check, fit_cofinite_type
from .hopfmodels import FilteredHopfModel, make_model
from .mockinj import family_from_json, hom_vanishing_probe, lang_module_ga

__version__ = "0.1.0"
