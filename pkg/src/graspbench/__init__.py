"""graspbench: a hardware-free workbench for grasp-type switching interfaces.

Library layout:

* :mod:`graspbench.domain` -- grasp types, the switching cycle, the object
  catalog, events and trial records;
* :mod:`graspbench.dwell` -- the gaze-dwell selection engine and panel;
* :mod:`graspbench.backends` -- cycling, pattern and tap back-ends;
* :mod:`graspbench.sequencer` -- balanced presentation suites;
* :mod:`graspbench.session` -- phase machine, trial scoring, logs, replay;
* :mod:`graspbench.simulate` -- synthetic operators and whole experiments;
* :mod:`graspbench.analytics` -- metrics, curve fits and rank statistics;
* :mod:`graspbench.wire` / :mod:`graspbench.server` -- the live protocol;
* :mod:`graspbench.cli` -- the ``graspbench`` command.
"""

from .domain import (
    CYCLE_ORDER,
    Catalog,
    GazeSample,
    Grasp,
    ObjectItem,
    Phase,
    PhaseEvent,
    SelectionEvent,
    TrialRecord,
    cycle_distance,
    default_catalog,
    grasp_of_object,
)
from .dwell import DwellConfig, DwellEngine, DwellState, PanelLayout, hit_test, ingest_gaze
from .backends import (
    CoContraction,
    EmgPattern,
    FsmState,
    PatternInput,
    PrErrorModel,
    Tap,
    app_tap,
    fsm_trigger,
    make_backend,
    pattern_for_grasp,
    pr_map,
    pr_recognize,
)
from .sequencer import SequenceSet, Suite, SuiteConfig, generate_set, generate_suite, step_profile, validate_set
from .session import Session, SessionConfig, classify_phase, replay_log, score_trial
from .simulate import SimConfig, UserModel, run_experiment, simulate_trial
from .analytics import (
    ExperienceFit,
    KwResult,
    bonferroni_adjust,
    fit_experience_curve,
    fit_line_through_origin,
    kruskal_wallis,
    pairwise_tests,
    ssr,
    summarize,
)

__version__ = "0.1.0"
