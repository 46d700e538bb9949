"""Software emulation of the PrivacyCube tangible privacy-notice device."""

from .engine import (
    CollectionEvent,
    CubeState,
    EngineState,
    EventType,
    IconState,
    StateDelta,
    apply_delta,
    apply_event,
    compute_cube_state,
    cube_state_from_json,
    cube_state_to_json,
    diff_states,
    initial_state,
    set_focus,
)
from .profiles import (
    CollectionDeclaration,
    DevicePrivacyProfile,
    Registry,
    canonicalize_profile,
    load_profile_dir,
    parse_profile,
)
from .scenario import (
    NoticeLog,
    Scenario,
    parse_scenario,
    run_scenario,
    write_notice_log,
)
from .taxonomy import (
    INDEFINITE,
    AccessParty,
    Colour,
    DataCategory,
    Region,
    RetentionBucket,
    UsagePurpose,
    bucket_retention,
    colour_for_index,
    parse_taxonomy_term,
    region_of_country,
)

__version__ = "0.1.0"
