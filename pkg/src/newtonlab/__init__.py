"""Newton-map dynamics: basin rendering, contour analysis and topology audits."""
from .curves import (
    Curve,
    CurveError,
    PoleOnCurveError,
    RefinementError,
    disjoint_winding_sum,
    filled_set_contains,
    push_forward,
    relative_winding,
    winding_number,
)
from .dynamics import (
    ESCAPED,
    HIT_POLE,
    UNDECIDED,
    BasinGrid,
    NewtonBasinClassifier,
    OrbitResult,
    default_palette,
    iterate_orbit,
    render_basins,
    write_image,
)
from .expr import ParseError, differentiate, parse_function, simplify, to_string
from .fixedpoints import (
    CountReport,
    FixedPoint,
    classify_fixed_point,
    enclosed_poles,
    find_fixed_points,
    fixed_point_defect,
    isolate_fixed_points,
)
from .hypotheses import (
    check_index_hypotheses,
    check_map_out_twice,
    check_surround_and_map_out,
    poles_in_loops_search,
)
from .maps import CallableMap, NewtonMap, build_map, build_newton_map
from .poly import RootSet, polynomial_roots
from .topology import BasinAuditor, audit_connectivity, audit_unboundedness, count_holes, label_components
from .window import Window

__version__ = "0.1.0"

__all__ = [
    "Curve",
    "CurveError",
    "PoleOnCurveError",
    "RefinementError",
    "disjoint_winding_sum",
    "filled_set_contains",
    "push_forward",
    "relative_winding",
    "winding_number",
    "ESCAPED",
    "HIT_POLE",
    "UNDECIDED",
    "BasinGrid",
    "NewtonBasinClassifier",
    "OrbitResult",
    "default_palette",
    "iterate_orbit",
    "render_basins",
    "write_image",
    "CountReport",
    "FixedPoint",
    "classify_fixed_point",
    "enclosed_poles",
    "find_fixed_points",
    "fixed_point_defect",
    "isolate_fixed_points",
    "check_index_hypotheses",
    "check_map_out_twice",
    "check_surround_and_map_out",
    "poles_in_loops_search",
    "ParseError",
    "differentiate",
    "parse_function",
    "simplify",
    "to_string",
    "CallableMap",
    "NewtonMap",
    "build_map",
    "build_newton_map",
    "RootSet",
    "polynomial_roots",
    "BasinAuditor",
    "audit_connectivity",
    "audit_unboundedness",
    "count_holes",
    "label_components",
    "Window",
]
