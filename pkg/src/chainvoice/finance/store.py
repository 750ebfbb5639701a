"""Committed model artifacts.

Fitting is a build-time tool: its output (two sub-network class files, the
master file, and the flattened overall network) is serialized under the
package's data directory and committed, so runtime consumers load fixed
artifacts instead of re-running scipy.  `write_artifacts` regenerates them;
the CLI exposes it as the `fit` subcommand.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..bn import Network, NetworkSpec, build_network, load_master, network_from_dict
from ..bn.oobn import (
    OobnClass,
    master_to_dict,
    oobn_class_from_dict,
    oobn_class_to_dict,
)
from .fit import FitResult, fitted_master
from .networks import (
    DECISION,
    FI_CREDIT,
    FI_REWARDS,
    LOWER_FUNDED,
    SP_GWAL,
    SP_TIER1,
    STABILITY,
)
from .scenarios import ScenarioDef, scenarios_from_doc, scenarios_to_doc

SUPPLIER_FILE = "supplier_profile.json"
INCENTIVE_FILE = "financial_incentive.json"
OVERALL_FILE = "overall.json"
MASTER_FILE = "master.json"
SCENARIOS_FILE = "scenarios.json"


def _dump(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_artifacts(data_dir: str | Path, result: FitResult | None = None) -> FitResult:
    result = result or fitted_master()
    data_dir = Path(data_dir)
    models = data_dir / "models"
    models.mkdir(parents=True, exist_ok=True)

    supplier = result.master.instances["SupplierProfile"]
    incentive = result.master.instances["FinancialIncentive"]
    _dump(oobn_class_to_dict(supplier), models / SUPPLIER_FILE)
    _dump(oobn_class_to_dict(incentive), models / INCENTIVE_FILE)
    overall_cls = OobnClass(
        spec=result.flattened,
        inputs=(SP_TIER1, SP_GWAL, FI_CREDIT, FI_REWARDS, LOWER_FUNDED),
        outputs=(DECISION, STABILITY),
    )
    _dump(oobn_class_to_dict(overall_cls), models / OVERALL_FILE)
    _dump(master_to_dict(result.master), models / MASTER_FILE)
    _dump(scenarios_to_doc(), data_dir / SCENARIOS_FILE)
    return result


def _data_root() -> Path:
    return Path(str(resources.files("chainvoice").joinpath("data")))


def load_model_class(name: str, data_dir: str | Path | None = None) -> OobnClass:
    root = Path(data_dir) if data_dir else _data_root()
    return oobn_class_from_dict(json.loads((root / "models" / name).read_text()))


def load_overall_spec(data_dir: str | Path | None = None) -> NetworkSpec:
    return load_model_class(OVERALL_FILE, data_dir).spec


def load_overall_network(data_dir: str | Path | None = None) -> Network:
    return build_network(load_overall_spec(data_dir))


def load_committed_master(data_dir: str | Path | None = None):
    root = Path(data_dir) if data_dir else _data_root()
    return load_master(root / "models" / MASTER_FILE)


def load_scenarios(data_dir: str | Path | None = None) -> tuple[ScenarioDef, ...]:
    root = Path(data_dir) if data_dir else _data_root()
    return scenarios_from_doc(json.loads((root / SCENARIOS_FILE).read_text()))
