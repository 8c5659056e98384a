import json
import re

import pytest

import main
from catalog import AssertionOutcome, CaseResult
from scenarios import ScenarioConfig, dump_report, run_scenario


def extract_json(output_text, name='summary'):
    """Helper to extract the JSON string from GitHub output text."""
    m = re.search(rf"{name}<<EOF\n(.*)\nEOF", output_text, flags=re.DOTALL)
    return m.group(1) if m else None


def stub_result(case_id, passed):
    result = CaseResult(case_id, 'claim')
    result.outcomes.append(AssertionOutcome(case_id, 's', 'p', 'equals', True, passed, passed))
    return result


@pytest.mark.io
class TestGithubOutputs:
    """Test the key=value and heredoc lines written for the action"""

    def test_all_passed(self, github_output):
        main.write_github_outputs([stub_result('pd-ewl-caseA', True), stub_result('rsp-classical', True)])
        text = github_output.read_text()
        assert "cases_run=2\n" in text
        assert "failed_assertions=0\n" in text
        assert "all_passed=true\n" in text
        summary = json.loads(extract_json(text))
        assert [s['case'] for s in summary] == ['pd-ewl-caseA', 'rsp-classical']

    def test_failure_is_reported(self, github_output):
        main.write_github_outputs([stub_result('pd-ewl-caseA', False)])
        text = github_output.read_text()
        assert "all_passed=false\n" in text
        assert json.loads(extract_json(text))[0] == {'case': 'pd-ewl-caseA', 'passed': False,
                                                    'failed_assertions': 1, 'discrepancies': 0}

    def test_appends(self, github_output):
        github_output.write_text("earlier=1\n")
        main.write_github_outputs([stub_result('pd-ewl-caseA', True)])
        assert github_output.read_text().startswith("earlier=1\ncases_run=1\n")

    def test_unset_writes_nothing(self, tmp_path):
        main.write_github_outputs([stub_result('pd-ewl-caseA', True)])
        assert list(tmp_path.iterdir()) == []

    def test_unwritable(self, tmp_path, monkeypatch):
        monkeypatch.setenv('GITHUB_OUTPUT', str(tmp_path / 'missing' / 'out'))
        with pytest.raises(IOError, match="Cannot write GitHub Action outputs"):
            main.write_github_outputs([stub_result('pd-ewl-caseA', True)])

    def test_reproduce_writes_outputs(self, github_output, mocker):
        mocker.patch('main.reproduce', return_value=stub_result('rsp-entangled', True))
        with pytest.raises(SystemExit) as excinfo:
            main.main(['reproduce', 'rsp-entangled'])
        assert excinfo.value.code == 0
        assert json.loads(extract_json(github_output.read_text()))[0]['case'] == 'rsp-entangled'


class TestReportFormat:
    """Test the report document layout"""

    def test_sorted_and_indented(self, ewl_config_dict):
        text = dump_report(run_scenario(ScenarioConfig.from_dict(ewl_config_dict)))
        assert text.startswith('{\n  "config": {')
        keys = list(json.loads(text))
        assert keys == sorted(keys)

    def test_verdicts_are_strings(self):
        cfg = ScenarioConfig.from_dict({
            'scheme': 'CLASSICAL', 'game': {'pd': {'r': 3, 's': 0, 't': 5, 'u': 1}},
            'analyses': [{'kind': 'ess', 'candidate': 0.0}]})
        result = json.loads(dump_report(run_scenario(cfg)))['results'][0]
        assert result['ess_status'] == 'ESS'
        assert result['candidate'] == [0.0]
        assert set(result['witness']) == {'strategy', 'margin'}
