from .derive import derive_submodel_cpts
from .fit import FitResult, fit_overall_cpts, fitted_master
from .networks import (
    financial_incentive_class,
    overall_master,
    supplier_profile_class,
)
from .scenarios import (
    ScenarioDef,
    ScenarioReport,
    TargetCheck,
    builtin_scenarios,
    run_scenario,
    scenario_by_name,
    scenarios_from_doc,
    scenarios_to_doc,
)

__all__ = [
    "derive_submodel_cpts",
    "FitResult",
    "fit_overall_cpts",
    "fitted_master",
    "financial_incentive_class",
    "overall_master",
    "supplier_profile_class",
    "ScenarioDef",
    "ScenarioReport",
    "TargetCheck",
    "builtin_scenarios",
    "run_scenario",
    "scenario_by_name",
    "scenarios_from_doc",
    "scenarios_to_doc",
]
