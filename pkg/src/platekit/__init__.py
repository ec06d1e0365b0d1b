"""platekit: preference elicitation for physically settled plate arrangements."""

__version__ = "0.1.0"

from .scene import (  # noqa: F401
    ItemSpec,
    PlacedItem,
    PlacementAction,
    Pose,
    SceneState,
    WeightGrid,
    flatten_state,
    grid_value,
    unflatten_state,
    w_distance,
)
from .settle import SettleConfig, batch_rollout, drop_height, rollout, step  # noqa: F401
from .tasks import ActionBounds, TaskDefinition, load_task  # noqa: F401
from .rules import RuleTemplate, reference_actions, rule_target  # noqa: F401
from .planner import CemConfig, PlanCache, PlanResult, arrangement_cost, plan  # noqa: F401
from .prefgp import (  # noqa: F401
    ComparisonDataset,
    GaussianApprox,
    GpHyperparams,
    PrefRecord,
    fit_posterior,
    kernel,
    pref_likelihood,
    predict,
    sample_utility,
)
from .acquisition import AcquisitionConfig, random_pair, thompson_pair  # noqa: F401
from .users import (  # noqa: F401
    PreferenceModel,
    SimulatedUser,
    UncertainConfig,
    ideal_answer,
    preference_value,
    uncertain_answer,
)
from .session import (  # noqa: F401
    SessionConfig,
    SessionEngine,
    SessionResult,
    estimate,
    metrics,
    replay_session,
    run_session,
    synthesize,
)
from .render import RenderedScene, render  # noqa: F401
