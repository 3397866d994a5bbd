"""Choose between ANOVA and Kruskal-Wallis from normality and variance gates, with an audit trail."""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from dao_kpi.errors import DegenerateSampleError, InsufficientSampleError
from dao_kpi.stats.comparisons import anova_oneway, dunn_posthoc, kruskal_wallis, levene
from dao_kpi.stats.data_utils import GroupedSamples, TestResult
from dao_kpi.stats.normality import MIN_N, shapiro_wilk


DEFAULT_ALPHA = 0.05

RULE_ANOVA = 'Data normal with equal variances; ANOVA used.'
RULE_NOT_NORMAL = 'Data deviate from normality; ANOVA not used.'
RULE_UNEQUAL_VARIANCE = 'Variances differ; ANOVA not used.'
RULE_UNASSESSED_VARIANCE = 'Homogeneity of variances could not be assessed; ANOVA not used.'
RULE_POSTHOC = 'Omnibus test significant across 3 or more groups; post-hoc tests applied.'


@dataclass
class GateCheck:
    label: str
    status: str # passed | failed | unassessed | degenerate
    result: Optional[TestResult] = None
    reason: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return {'label': self.label, 'status': self.status, 'reason': self.reason,
                'result': None if self.result is None else self.result.to_dict()}


@dataclass
class TestPlan:
    alpha: float
    normality: List[GateCheck]
    homogeneity: GateCheck
    chosen: str
    rules: List[str]
    omnibus: TestResult
    posthoc: List[TestResult] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'alpha': self.alpha,
            'normality': [c.to_dict() for c in self.normality],
            'homogeneity': self.homogeneity.to_dict(),
            'chosen': self.chosen,
            'rules': list(self.rules),
            'omnibus': self.omnibus.to_dict(),
            'posthoc': [r.to_dict() for r in self.posthoc],
        }


def _normality_gate(label: str, values, alpha: float) -> GateCheck:
    if len(values) < MIN_N:
        return GateCheck(label, 'unassessed', reason=f'n = {len(values)} < {MIN_N}')
    try:
        result = shapiro_wilk(values)
    except DegenerateSampleError as e:
        # a constant group is not normally distributed
        return GateCheck(label, 'degenerate', reason=str(e))
    return GateCheck(label, 'passed' if result.p_value >= alpha else 'failed', result)


def _homogeneity_gate(g: GroupedSamples, alpha: float) -> GateCheck:
    testable = g.subset(label for label, n in zip(g.labels, g.sizes) if n >= 2)
    if testable.k < 2:
        return GateCheck('all', 'unassessed', reason='fewer than two groups with at least 2 values')
    try:
        result = levene(testable, center='median')
    except (DegenerateSampleError, InsufficientSampleError) as e:
        return GateCheck('all', 'degenerate', reason=str(e))
    return GateCheck('all', 'passed' if result.p_value >= alpha else 'failed', result)


def select_test(g: GroupedSamples, alpha: float = DEFAULT_ALPHA) -> TestPlan:
    """
    Run the gates and the chosen omnibus test.

    ANOVA is used only when every assessable group passes Shapiro-Wilk and the
    Brown-Forsythe variance test passes; otherwise Kruskal-Wallis. A significant
    omnibus result over 3 or more groups adds Dunn's test with Bonferroni adjustment.
    """
    if g.k < 2:
        raise InsufficientSampleError(f'Group comparison needs at least 2 groups, got {g.k}')

    normality = [_normality_gate(label, values, alpha) for label, values in g.groups]
    homogeneity = _homogeneity_gate(g, alpha)

    rules = []
    if any(c.status in ('failed', 'degenerate') for c in normality):
        rules.append(RULE_NOT_NORMAL)
    if homogeneity.status == 'failed':
        rules.append(RULE_UNEQUAL_VARIANCE)
    elif homogeneity.status != 'passed':
        rules.append(RULE_UNASSESSED_VARIANCE)

    if rules:
        chosen, omnibus = 'kruskal_wallis', kruskal_wallis(g)
    else:
        rules.append(RULE_ANOVA)
        chosen, omnibus = 'anova_oneway', anova_oneway(g)

    posthoc = []
    if omnibus.p_value < alpha and g.k >= 3:
        rules.append(RULE_POSTHOC)
        posthoc = dunn_posthoc(g, adjust='bonferroni')
    logging.debug(f'select_test: {chosen}, p = {omnibus.p_value:.4g}, rules {rules}')
    return TestPlan(alpha=alpha, normality=normality, homogeneity=homogeneity, chosen=chosen, rules=rules,
                    omnibus=omnibus, posthoc=posthoc)
