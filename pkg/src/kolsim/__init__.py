"""kolsim: time-aware agent-society simulation for influencer campaign ranking.

Fits user-activity and content-survival models from interaction logs,
simulates advertisement dissemination period by period under pluggable
agent behavior policies, scores each candidate influencer's campaign, and
ranks candidates against a gold promoter set.
"""

from .dataset import (
    CampaignSpec,
    Dataset,
    FollowEdge,
    InteractionEvent,
    SynthSpec,
    UserRecord,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from .timeline import (
    ActiveSet,
    EmConfig,
    GmmComponent,
    UserTimelineModel,
    density,
    fit_gmm,
    sample_active_users,
)
from .lifecycle import (
    ActiveContentSet,
    ContentLifecycleModel,
    CoxConfig,
    LifecycleCovariates,
    SurvivalObservation,
    active_content,
    expiration_probability,
    extract_covariates,
    fit_coxph,
    fit_coxph_design,
    observation_from_series,
)
from .agents import (
    AgentProfile,
    BehaviorContext,
    BehaviorPolicy,
    LlmPolicy,
    Reaction,
    RuleBasedPolicy,
    StochasticPolicy,
    assess_inclination,
    build_profile,
    make_policy,
    predict_reaction,
)
from .graph import CommentEdge, InteractionGraph, init_graph
from .simulator import (
    CampaignScore,
    RawCampaignResult,
    SimulationConfig,
    rank_influencers,
    run_campaign,
    score_campaign,
    simulate_all_candidates,
)
from .baselines import (
    IcModel,
    SelectionResult,
    celf_select,
    celfpp_select,
    ic_spread,
    naive_greedy_select,
)
from .metrics import EvalReport, evaluate_ranking, ndcg_at_k, precision_recall_at_k

__version__ = "0.1.0"
