"""Layer-wise averaging across client groups with different depths."""

from .aggregator import aggregate, build_plan, plan_for_group
from .models import AggregationPlan, GroupSpec

__all__ = [
    "AggregationPlan",
    "GroupSpec",
    "aggregate",
    "build_plan",
    "plan_for_group",
]
