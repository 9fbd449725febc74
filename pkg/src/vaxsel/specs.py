"""Built-in model specifications and the reference cells they are checked against.

Five specifications, each a pair of variable lists: the selection stage
models whether a country started vaccinating, the outcome stage models
the log vaccination rate among starters.  The vaccine provider dummies
enter the outcome stage of every model; days since first vaccination is
outcome-only; soft-power membership is selection-only and government
effectiveness outcome-only (the exclusion pattern that identifies the
correction term).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelSpec:
    name: str
    selection_vars: tuple
    outcome_vars: tuple
    include_vaccine_dummies: bool = True
    panel_filter: str | None = None

    def __post_init__(self):
        if "days" in self.selection_vars:
            raise ValueError(f"{self.name}: days is an outcome-stage variable only")
        if "soft_power_30" in self.outcome_vars:
            raise ValueError(f"{self.name}: soft_power_30 is a selection-stage variable only")
        if "gov_eff" in self.selection_vars:
            raise ValueError(f"{self.name}: gov_eff is an outcome-stage variable only")


def builtin_specs() -> list:
    return [
        ModelSpec(
            name="model1",
            selection_vars=("cases", "gov_response"),
            outcome_vars=("cases", "days", "gov_response"),
        ),
        ModelSpec(
            name="model2",
            selection_vars=("cases", "soft_power_30"),
            outcome_vars=("cases", "days", "gov_eff"),
        ),
        ModelSpec(
            name="model3",
            selection_vars=(
                "cases",
                "gov_response",
                "exports",
                "health_exp",
                "military_exp",
                "soft_power_30",
            ),
            outcome_vars=("cases", "days", "gov_response", "health_exp", "military_exp"),
        ),
        ModelSpec(
            name="model4",
            selection_vars=(
                "cases",
                "gov_response",
                "gdp",
                "exports",
                "health_exp",
                "military_exp",
                "soft_power_30",
            ),
            outcome_vars=(
                "cases",
                "days",
                "gov_response",
                "gdp",
                "health_exp",
                "military_exp",
                "gov_eff",
                "pop_65",
            ),
        ),
        ModelSpec(
            name="model5",
            selection_vars=(
                "cases",
                "gov_response",
                "gdp_pc_ppp",
                "exports",
                "health_exp",
                "military_exp",
                "soft_power_30",
            ),
            outcome_vars=(
                "cases",
                "days",
                "gov_response",
                "gdp_pc_ppp",
                "health_exp",
                "military_exp",
                "gov_eff",
                "pop_65",
            ),
        ),
    ]


# Display order for estimation-table rows (variables absent from a model
# simply render blank), mirroring the reference layout.
TABLE_ROW_ORDER = (
    "cases",
    "days",
    "gov_response",
    "gdp",
    "gdp_pc_ppp",
    "exports",
    "health_exp",
    "military_exp",
    "gov_eff",
    "pop_65",
    "soft_power_30",
    "west",
    "china",
    "russia",
    "imr_lambda",
    "const",
)


@dataclass(frozen=True)
class AnchorCell:
    """One reference cell: where it lives and the published estimate."""

    table: str
    model: str
    stage: str  # "selection" | "outcome"
    variable: str
    ref_coef: float
    ref_se: float
    ref_stars: str


# Reference estimates for the anchor cells used by the diff report and the
# pattern-level acceptance checks.
ANCHOR_CELLS = (
    # table2 selection stage
    AnchorCell("table2", "model1", "selection", "cases", 0.525, 0.130, "***"),
    AnchorCell("table2", "model2", "selection", "cases", 0.504, 0.096, "***"),
    AnchorCell("table2", "model3", "selection", "cases", 0.567, 0.145, "***"),
    AnchorCell("table2", "model4", "selection", "cases", 0.469, 0.120, "***"),
    AnchorCell("table2", "model5", "selection", "cases", 0.387, 0.150, "**"),
    AnchorCell("table2", "model2", "selection", "soft_power_30", 2.129, 0.352, "***"),
    AnchorCell("table2", "model3", "selection", "soft_power_30", 2.337, 0.435, "***"),
    AnchorCell("table2", "model4", "selection", "soft_power_30", 1.224, 0.487, "**"),
    AnchorCell("table2", "model5", "selection", "soft_power_30", 1.286, 0.368, "***"),
    AnchorCell("table2", "model4", "selection", "gdp", 0.400, 0.127, "***"),
    AnchorCell("table2", "model5", "selection", "gdp_pc_ppp", 0.737, 0.281, "***"),
    # table2 outcome stage
    AnchorCell("table2", "model1", "outcome", "days", 0.087, 0.018, "***"),
    AnchorCell("table2", "model2", "outcome", "days", 0.069, 0.015, "***"),
    AnchorCell("table2", "model3", "outcome", "days", 0.085, 0.020, "***"),
    AnchorCell("table2", "model4", "outcome", "days", 0.071, 0.018, "***"),
    AnchorCell("table2", "model5", "outcome", "days", 0.068, 0.019, "***"),
    AnchorCell("table2", "model2", "outcome", "gov_eff", 0.718, 0.217, "***"),
    AnchorCell("table2", "model4", "outcome", "gov_eff", 0.782, 0.255, "***"),
    AnchorCell("table2", "model5", "outcome", "gov_eff", 0.335, 0.525, ""),
    AnchorCell("table2", "model5", "outcome", "gdp_pc_ppp", 0.574, 0.697, ""),
    # table3: government-effectiveness and GDP outliers excluded
    AnchorCell("table3", "model2", "outcome", "gov_eff", 1.405, 0.454, "***"),
    AnchorCell("table3", "model4", "outcome", "gov_eff", 1.447, 0.535, "***"),
    AnchorCell("table3", "model2", "selection", "soft_power_30", 1.735, 0.307, "***"),
    AnchorCell("table3", "model3", "selection", "soft_power_30", 1.599, 0.355, "***"),
    AnchorCell("table3", "model4", "selection", "soft_power_30", 0.879, 0.525, "*"),
    # table4: vaccination-rate outliers excluded
    AnchorCell("table4", "model2", "outcome", "gov_eff", 0.573, 0.182, "***"),
    AnchorCell("table4", "model4", "outcome", "gov_eff", 0.519, 0.217, "**"),
    AnchorCell("table4", "model2", "selection", "soft_power_30", 2.197, 0.352, "***"),
    AnchorCell("table4", "model3", "selection", "soft_power_30", 2.407, 0.416, "***"),
    AnchorCell("table4", "model4", "selection", "soft_power_30", 1.191, 0.488, "**"),
)
