import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from scenarios import ConfigError, ScenarioConfig, run_scenario

logger = logging.getLogger(__name__)

CASES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'cases')
CASE_IDS = (
    'pd-ewl-caseA',
    'pd-ewl-caseB',
    'pd-ewl-caseC',
    'ewl-entanglement-ess',
    'bos-three-ne',
    'bos-antisymmetric-no-ess',
    'asym-switch-off',
    'asym-switch-on',
    'sym2x2-thresholds',
    'three-player-classes',
    'rsp-classical',
    'rsp-entangled',
    'rsp-payoff-sum',
)
DEFAULT_APPROX_TOL = 1e-9
_MISSING = object()


class UnknownCaseError(KeyError):
    """Case id outside the reproduction catalog"""


@dataclass(frozen=True)
class CaseId:
    value: str

    def __post_init__(self):
        if self.value not in CASE_IDS:
            raise UnknownCaseError(f"Unknown case id {self.value!r}; run list-cases for the catalog")

    def __str__(self) -> str:
        return self.value


@dataclass
class Expectation:
    """One stored verdict or value, checked against a dotted path in a scenario report"""
    scenario: str
    path: str
    op: str
    expected: Any
    tol: float = DEFAULT_APPROX_TOL
    informational: bool = False
    note: str = ''

    OPS = ('equals', 'approx', 'max', 'min', 'in', 'set_approx')

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Expectation':
        ops = [op for op in cls.OPS if op in data]
        if len(ops) != 1:
            raise ValueError(f"Expectation at {data.get('path')!r} needs exactly one of {cls.OPS}")
        op = ops[0]
        return cls(
            scenario=data['scenario'],
            path=data['path'],
            op=op,
            expected=data[op],
            tol=float(data.get('tol', DEFAULT_APPROX_TOL)),
            informational=bool(data.get('informational', False)),
            note=data.get('note', ''),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {'scenario': self.scenario, 'path': self.path, self.op: self.expected,
                'tol': self.tol, 'informational': self.informational, 'note': self.note}

    def check(self, measured: Any) -> bool:
        if measured is _MISSING:
            return False
        if self.op == 'equals':
            return measured == self.expected
        if self.op == 'in':
            return measured in self.expected
        if measured is None:
            return False
        if self.op == 'approx':
            return _close(measured, self.expected, self.tol)
        if self.op == 'max':
            return measured <= self.expected
        if self.op == 'min':
            return measured >= self.expected
        return _same_set(measured, self.expected, self.tol)


def _close(a: Any, b: Any, tol: float) -> bool:
    if isinstance(a, list) or isinstance(b, list):
        if not (isinstance(a, list) and isinstance(b, list)) or len(a) != len(b):
            return False
        return all(_close(x, y, tol) for x, y in zip(a, b))
    if a is None or b is None:
        return False
    return abs(float(a) - float(b)) <= tol


def _same_set(measured: List[Any], expected: List[Any], tol: float) -> bool:
    """Multiset equality with tolerance"""
    if len(measured) != len(expected):
        return False
    remaining = list(measured)
    for item in expected:
        match = next((k for k, m in enumerate(remaining) if _close(m, item, tol)), None)
        if match is None:
            return False
        remaining.pop(match)
    return True


def resolve_path(document: Any, path: str) -> Any:
    """Follow a dotted path; integer parts index lists"""
    current = document
    for part in path.split('.'):
        if isinstance(current, list):
            try:
                current = current[int(part)]
            except (ValueError, IndexError):
                return _MISSING
        elif isinstance(current, dict) and part in current:
            current = current[part]
        else:
            return _MISSING
    return current


@dataclass
class CaseSpec:
    id: str
    claim: str
    scenarios: List[Dict[str, Any]]
    expect: List[Expectation]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CaseSpec':
        return cls(
            id=data['id'],
            claim=data['claim'],
            scenarios=list(data['scenarios']),
            expect=[Expectation.from_dict(e) for e in data['expect']],
        )


class CaseCatalog(dict):
    """Reproduction cases keyed by id, loaded from the bundled JSON files"""

    def __init__(self, cases_dir: str = CASES_DIR):
        super().__init__()
        self.cases_dir = cases_dir
        self._load_cases()

    def _load_cases(self) -> None:
        for case_id in CASE_IDS:
            path = os.path.join(self.cases_dir, f"{case_id}.json")
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    spec = CaseSpec.from_dict(json.load(f))
            except OSError as e:
                raise IOError(f"Cannot read case file {path}: {e}")
            except json.JSONDecodeError as e:
                raise ConfigError(f"malformed case file {path}: {e.msg}", line=e.lineno, column=e.colno)
            except (KeyError, ValueError) as e:
                raise ConfigError(f"invalid case file {path}: {e}")
            if spec.id != case_id:
                raise ConfigError(f"case file {path} declares id {spec.id!r}")
            self[case_id] = spec
        logger.debug(f"Loaded {len(self)} reproduction cases from {self.cases_dir}")

    def get_case(self, case_id: str) -> CaseSpec:
        return self[str(CaseId(str(case_id)))]


@dataclass
class AssertionOutcome:
    case: str
    scenario: str
    path: str
    op: str
    expected: Any
    measured: Any
    passed: bool
    informational: bool = False
    note: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return {'case': self.case, 'scenario': self.scenario, 'path': self.path, 'op': self.op,
                'expected': self.expected, 'measured': self.measured, 'passed': self.passed,
                'informational': self.informational, 'note': self.note}


@dataclass
class CaseResult:
    case_id: str
    claim: str
    outcomes: List[AssertionOutcome] = field(default_factory=list)
    reports: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def failed_assertions(self) -> int:
        return sum(1 for o in self.outcomes if not o.passed and not o.informational)

    @property
    def passed(self) -> bool:
        return self.failed_assertions == 0

    @property
    def discrepancies(self) -> List[Dict[str, Any]]:
        return [o.to_dict() for o in self.outcomes if o.informational and not o.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {'case': self.case_id, 'claim': self.claim, 'passed': self.passed,
                'failed_assertions': self.failed_assertions,
                'assertions': [o.to_dict() for o in self.outcomes],
                'discrepancies': self.discrepancies}


def reproduce(case: str, catalog: Optional[CaseCatalog] = None,
              tables: Optional[Dict[str, Any]] = None) -> CaseResult:
    """Run the bundled scenarios of a case and compare against its stored expectations"""
    catalog = catalog if catalog is not None else CaseCatalog()
    spec = catalog.get_case(case)
    result = CaseResult(spec.id, spec.claim)
    for raw in spec.scenarios:
        cfg = ScenarioConfig.from_dict(raw)
        result.reports[cfg.name] = run_scenario(cfg, tables)

    for exp in spec.expect:
        report = result.reports.get(exp.scenario)
        measured = resolve_path(report, exp.path) if report is not None else _MISSING
        passed = exp.check(measured)
        outcome = AssertionOutcome(spec.id, exp.scenario, exp.path, exp.op, exp.expected,
                                   None if measured is _MISSING else measured, passed,
                                   exp.informational, exp.note)
        result.outcomes.append(outcome)
        if not passed and exp.informational:
            logger.warning(f"{spec.id}: published value differs at {exp.scenario}:{exp.path} "
                           f"(measured {outcome.measured!r}, stated {exp.expected!r})")
        elif not passed:
            logger.error(f"{spec.id}: assertion failed at {exp.scenario}:{exp.path} "
                         f"(measured {outcome.measured!r}, expected {exp.op} {exp.expected!r})")
    logger.info(f"{spec.id}: {len(result.outcomes) - result.failed_assertions}/{len(result.outcomes)} "
                f"assertions passed, {len(result.discrepancies)} discrepancies")
    return result


def reproduce_all(catalog: Optional[CaseCatalog] = None,
                  tables: Optional[Dict[str, Any]] = None) -> List[CaseResult]:
    catalog = catalog if catalog is not None else CaseCatalog()
    return [reproduce(case_id, catalog, tables) for case_id in CASE_IDS]


def format_table(results: List[CaseResult]) -> str:
    """Per-assertion pass/fail lines followed by one summary line"""
    lines = []
    for result in results:
        for o in result.outcomes:
            status = 'PASS' if o.passed else ('NOTE' if o.informational else 'FAIL')
            lines.append(f"{status:4}  {o.case:26} {o.scenario:24} {o.path}")
    total = sum(len(r.outcomes) for r in results)
    failed = sum(r.failed_assertions for r in results)
    notes = sum(len(r.discrepancies) for r in results)
    lines.append(f"{len(results)} case(s), {total} assertion(s), {failed} failed, {notes} discrepancies")
    return '\n'.join(lines)
