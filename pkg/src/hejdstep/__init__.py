"""Semi-analytical pricing of geometric down-and-out step call options under
hyper-exponential jump-diffusion markets, with maturity randomization,
Gaver-Stehfest inversion, an early-exercise diffusion/jump split, and an
independent Monte-Carlo oracle."""

from .errors import (
    AmbiguousBoundaryError,
    BracketError,
    BudgetError,
    ConfigError,
    ConvergenceError,
    HejdStepError,
    NoBoundaryError,
    OrderError,
    PoleError,
    QuadratureError,
    SingularSystemError,
)
from .inversion import (
    DEFAULT_GS_ORDER,
    QUANTITIES,
    GsConfig,
    gs_invert,
    gs_weights,
    price_summary,
    price_time_domain,
)
from .model import (
    DownOutStepSpec,
    DualModelReport,
    GeneratorConfig,
    HejdModel,
    dual_model,
    generator_apply,
    laplace_exponent,
    laplace_exponent_derivative,
    levy_exponent,
)
from .montecarlo import (
    DualityReport,
    McEstimate,
    PathConfig,
    mc_euro_step_price,
    simulate_terminal,
    verify_duality,
)
from .pricing import (
    MrAmericanSolution,
    MrEuropeanSolution,
    eval_american_mr,
    eval_eep_mr,
    eval_eep_split_mr,
    eval_european_mr,
    oide_residual,
    seasoned_price,
    solve_american_mr,
    solve_european_mr,
)
from .roots import RootSet, find_roots

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # model
    "HejdModel", "DownOutStepSpec", "DualModelReport", "GeneratorConfig",
    "laplace_exponent", "laplace_exponent_derivative", "levy_exponent",
    "dual_model", "generator_apply",
    # roots
    "RootSet", "find_roots",
    # pricing
    "MrEuropeanSolution", "MrAmericanSolution",
    "solve_european_mr", "eval_european_mr", "solve_american_mr",
    "eval_eep_mr", "eval_eep_split_mr", "eval_american_mr",
    "seasoned_price", "oide_residual",
    # inversion
    "GsConfig", "gs_weights", "gs_invert", "price_time_domain", "price_summary",
    "QUANTITIES", "DEFAULT_GS_ORDER",
    # monte carlo
    "PathConfig", "McEstimate", "DualityReport",
    "simulate_terminal", "mc_euro_step_price", "verify_duality",
    # errors
    "HejdStepError", "ConfigError", "PoleError", "QuadratureError",
    "BracketError", "ConvergenceError", "SingularSystemError",
    "NoBoundaryError", "AmbiguousBoundaryError", "OrderError", "BudgetError",
]
