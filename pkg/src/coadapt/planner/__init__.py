from .search import (
    DEFAULT_NODE_LIMIT,
    DEFAULT_TIME_LIMIT,
    Plan,
    PlanStep,
    SearchLimitExceeded,
    Unsolvable,
    extract_reconfigurations,
    plan,
    relaxed_unreachable,
)
from .serialize import (
    PlanFormatError,
    diff_plans,
    dumps_plan,
    loads_plan,
    plan_from_dict,
    plan_to_dict,
    render_plan,
    render_step,
)
from .validate import Invalid, Valid, validate, validate_plan
