"""Best-response flow laboratory for 3x3 zero-sum games."""

from .diagrams import (
    TransitionDiagram,
    canonical_form,
    check_conditions,
    diagram_from_game,
    enumerate_classes,
    find_realization,
    short_loops,
)
from .flow import (
    CrossingPlane,
    Orbit,
    hamiltonian_velocity,
    integrate_br,
    integrate_hamiltonian,
    segment_affine_map,
    step_hamiltonian,
)
from .game import (
    BimatrixGame,
    GameSystem,
    NashData,
    ZeroSumWitness,
    best_responses,
    hamiltonian,
    project_to_level_set,
    region_of,
    simplex_point,
    tangent_vector,
    validate_game,
)
from .returnmap import (
    AffineMap2D,
    classify_return_map,
    find_islands,
    itinerary_domain,
    loop_return_map,
)
from .sections import SectionChart, build_section_charts, section_hits
from .stats import (
    detect_periodic_itinerary,
    time_fractions,
    transition_counts,
    visit_frequencies,
)

__version__ = "0.1.0"
