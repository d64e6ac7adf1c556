"""Link-level simulator for non-coherent massive-MIMO satellite links."""

__version__ = "0.1.0"

from .constellation import (  # noqa: E402
    JointConstellation,
    PskConstellation,
    UserConstellationSet,
    assign_rotations,
    build_joint,
    demap_joint,
    make_psk,
)
from .engine import BerRecord, find_min_antennas, run_point, sweep  # noqa: E402
from .scenario import ScenarioConfig, preset_mega_leo, preset_vsat_geo  # noqa: E402
