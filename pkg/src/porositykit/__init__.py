"""Porosity, mean porosity and dimension bounds for dyadic sets and cascade measures."""
from __future__ import annotations

from .dyadic import (Box, CubeIndex, ancestor, binary_index, child_cubes, cube_containing,
                     format_cube, from_binary_index, iter_depth, magnify, parse_cube, root)
from .errors import (DegenerateBall, InstanceTooLarge, InvalidArgument, PorosityKitError,
                     UndefinedAtPoint)
from .measures import (CascadeMeasure, MassBracket, SamplePoint, bernoulli_cascade,
                       comb_measure, counterexample_measure, custom_measure, lebesgue,
                       mass_of_ball, mass_of_cube, sample_point, sample_points)
from .sets import (DyadicSet, PorousScaleSet, comb_set, digit_constraint_set,
                   even_digits_zero, example_dimension, example_set, full_set, has_m_hole,
                   porous_scales)
from .porosity import (PorosityProfile, flag_matrix, mean_porosity_fraction, por_measure,
                       por_set, porosity_profile, porous_flags_at_points, select_offset)
from .dimension import (CertificateVerdict, DimensionEstimate, box_dimension,
                        dimension_certificate, holder_step, local_dimension,
                        max_collection_sum, packing_dimension_estimate)
from .theorem import (TheoremConstants, beta, constants, dim_bound, epsilon0, porosity_gain,
                      verify_claim1, verify_claim2)
from .reports import SCHEMA_VERSION, Report, report_schema_version

__version__ = "1.0.0"
