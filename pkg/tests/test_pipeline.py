import json
import shutil

import pytest

from dao_kpi.cli.run_pipeline import EXIT_CONFIG, EXIT_OK, EXIT_STAGE, EXIT_USAGE, run
from dao_kpi.cli.stages import KPI_DIR, REPORT_DIR, STAT_REPORT_NAME, STATS_DIR
from dao_kpi.harmonize.dataset import MANIFEST_NAME
from dao_kpi.kpi_engine import kpi_config as cfg
from dao_kpi.report.emit import BUNDLE_NAME, CHART_DIR, KPI_SUMMARY_NAME, STAT_TESTS_NAME
from dao_kpi.synth.project import PROJECT_NAME, random_specs, read_ground_truth, write_synth_project


def _run_all(project_dir, output_dir, *extra):
    return run(['all', '--config', str(project_dir / PROJECT_NAME), '--output', str(output_dir), *extra])


def _kpi_documents(output_dir):
    manifest = json.loads((output_dir / KPI_DIR / MANIFEST_NAME).read_text())
    return {e['dao_id']: json.loads((output_dir / KPI_DIR / e['file']).read_text()) for e in manifest['daos']}


def _assert_matches_ground_truth(project_dir, output_dir):
    truth = read_ground_truth(project_dir)
    documents = _kpi_documents(output_dir)
    assert sorted(documents) == sorted(truth)
    for dao_id, expected in truth.items():
        metrics = documents[dao_id]['kpi']['metrics']
        assessment = documents[dao_id]['kpi']['assessment']
        assert metrics['total_members'] == expected.total_members, dao_id
        assert metrics['active_members'] == expected.active_members, dao_id
        assert metrics['total_proposals'] == expected.total_proposals, dao_id
        assert metrics['participation_rate'] == pytest.approx(expected.participation_rate), dao_id
        assert metrics['approval_rate'] == pytest.approx(expected.approval_rate), dao_id
        assert metrics['avg_duration_days'] == pytest.approx(expected.avg_duration_days), dao_id
        assert metrics['circulating_pct'] == pytest.approx(expected.circulating_pct), dao_id
        assert metrics['largest_holder_share'] == pytest.approx(expected.largest_holder_share), dao_id
        assert {kpi: assessment[kpi]['level'] for kpi in cfg.KPI_NAMES} == expected.levels, dao_id
        assert assessment['composite'] == expected.composite, dao_id
        assert sorted(documents[dao_id]['record']['voters']) == expected.voters, dao_id


def test_full_pipeline_matches_ground_truth(small_project, tmp_path):
    assert _run_all(small_project, tmp_path) == EXIT_OK
    _assert_matches_ground_truth(small_project, tmp_path)
    report_dir = tmp_path / REPORT_DIR
    for name in (KPI_SUMMARY_NAME, STAT_TESTS_NAME, BUNDLE_NAME):
        assert (report_dir / name).exists()
    assert any((report_dir / CHART_DIR).glob('*.svg'))
    assert not list(tmp_path.glob('*_error_log.txt'))


def test_pipeline_outputs_are_reproducible(small_project, tmp_path):
    assert _run_all(small_project, tmp_path / 'a') == EXIT_OK
    assert _run_all(small_project, tmp_path / 'b') == EXIT_OK
    compared = [f'{STATS_DIR}/{STAT_REPORT_NAME}', f'{REPORT_DIR}/{KPI_SUMMARY_NAME}',
                f'{REPORT_DIR}/{STAT_TESTS_NAME}', f'{REPORT_DIR}/{BUNDLE_NAME}']
    compared += [str(p.relative_to(tmp_path / 'a')) for p in (tmp_path / 'a' / REPORT_DIR / CHART_DIR).iterdir()]
    for relative in compared:
        assert (tmp_path / 'a' / relative).read_bytes() == (tmp_path / 'b' / relative).read_bytes(), relative


def test_stages_run_one_at_a_time(small_project, tmp_path):
    config = str(small_project / PROJECT_NAME)
    for stage in ('fetch', 'decode', 'build', 'kpi', 'stats'):
        assert run([stage, '--config', config, '--output', str(tmp_path)]) == EXIT_OK
    assert run(['report', '--config', config, '--output', str(tmp_path), '--formats', 'csv',
                '--radar-daos', 'bravo-mid,oz-large']) == EXIT_OK
    assert (tmp_path / REPORT_DIR / KPI_SUMMARY_NAME).exists()
    assert not (tmp_path / REPORT_DIR / BUNDLE_NAME).exists()


def test_stage_before_its_inputs_exits_with_stage_error(small_project, tmp_path, caplog):
    assert run(['stats', '--config', str(small_project / PROJECT_NAME), '--output', str(tmp_path)]) == EXIT_STAGE
    assert MANIFEST_NAME in caplog.text


def test_snapshot_past_chain_head_is_a_stage_error(small_project, tmp_path):
    project = json.loads((small_project / PROJECT_NAME).read_text())
    beyond = max(project['snapshot_blocks'].values()) + 1_000
    assert _run_all(small_project, tmp_path, '--snapshot-block', str(beyond)) == EXIT_STAGE


def test_unknown_radar_dao_is_a_stage_error(small_project, tmp_path):
    assert _run_all(small_project, tmp_path, '--radar-daos', 'nobody') == EXIT_STAGE


def test_unwritable_output_is_a_stage_error(small_project, tmp_path, caplog):
    blocker = tmp_path / 'blocker'
    blocker.write_text('a file, not a directory')
    assert _run_all(small_project, blocker / 'out') == EXIT_STAGE
    assert 'I/O failure' in caplog.text
    assert run(['synth', '--output', str(blocker / 'project'), '--dao-count', '1']) == EXIT_STAGE


@pytest.mark.parametrize('argv', [
    ['explode'],
    ['all'],
    ['all', '--config', 'project.json', '--alpha', 'high'],
])
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_unknown_format_is_a_usage_error(small_project, tmp_path):
    assert _run_all(small_project, tmp_path, '--formats', 'csv,pdf') == EXIT_USAGE


def test_help_exits_cleanly():
    assert run(['--help']) == EXIT_OK


def test_duplicate_dao_ids_are_a_config_error(small_project, tmp_path):
    shutil.copytree(small_project, tmp_path / 'project')
    path = tmp_path / 'project' / PROJECT_NAME
    project = json.loads(path.read_text())
    project['daos'].append(dict(project['daos'][0]))
    path.write_text(json.dumps(project))
    assert _run_all(tmp_path / 'project', tmp_path / 'out') == EXIT_CONFIG


def test_missing_config_is_a_config_error(tmp_path):
    assert run(['fetch', '--config', str(tmp_path / 'absent.json')]) == EXIT_CONFIG


def test_synth_command_writes_a_runnable_project(tmp_path):
    assert run(['synth', '--output', str(tmp_path / 'project'), '--seed', '5', '--dao-count', '3']) == EXIT_OK
    assert _run_all(tmp_path / 'project', tmp_path / 'out') == EXIT_OK
    _assert_matches_ground_truth(tmp_path / 'project', tmp_path / 'out')


def test_synth_command_rejects_bad_specs(tmp_path):
    spec_file = tmp_path / 'specs.json'
    spec_file.write_text(json.dumps([{'seed': 1, 'participation_target': 2.0}]))
    assert run(['synth', '--output', str(tmp_path / 'project'), '--spec', str(spec_file)]) == EXIT_CONFIG


@pytest.mark.slow
def test_random_ecosystem_matches_ground_truth(tmp_path):
    write_synth_project(random_specs(2024, 25), tmp_path / 'project', max_results_per_query=500,
                        max_block_span=20_000)
    assert _run_all(tmp_path / 'project', tmp_path / 'out') == EXIT_OK
    _assert_matches_ground_truth(tmp_path / 'project', tmp_path / 'out')
    stat_report = json.loads((tmp_path / 'out' / STATS_DIR / STAT_REPORT_NAME).read_text())
    assert set(stat_report['kpi_tests']) == set(cfg.KPI_NAMES)
