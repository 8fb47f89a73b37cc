"""Exact discrete and ergodic multiparameter maximal operators, Tauberian
constants and transference checks."""

__version__ = "0.1.0"

from .analysis import (AnalysisConstants, ball_count_sandwich, centered_bound, fit_exponent,
                       solyanik_c, theoretical_exponent)
from .ergodic import (FiniteSystem, Report, cycle_type_system, ergodic_level_measure,
                      ergodic_maximal_field, ergodic_tauberian_exhaustive, make_finite_system,
                      one_sided_maximal, orbit_section, orbit_window_set, product_cyclic_system,
                      random_commuting_system, transference_average_check,
                      transference_identity_batch, transference_identity_check,
                      transference_inequality_check)
from .errors import CapExceeded, DimensionMismatch, InvalidSystem, SolyanikError
from .lattice import (BasisElement, BasisFamily, LatticeSet, Window, box_average,
                      enumerate_box_family, enumerate_centered_ball_family,
                      enumerate_one_sided_family, enumerate_uncentered_ball_family,
                      lift_measure, lifted_box_average, make_family)
from .maximal import MaximalField, level_set, maximal_field, maximal_field_naive
from .tauberian import (TauberianEstimate, alpha_sweep, exhaustive_constant, search_constant,
                        tauberian_ratio)

__all__ = [name for name in dir() if not name.startswith("_")]
