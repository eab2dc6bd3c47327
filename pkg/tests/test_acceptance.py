import pytest

from chilab.core.config import settings
from scripts import run_acceptance
from scripts.run_acceptance import Campaign, run_campaign, run_determinism

pytestmark = pytest.mark.usefixtures("log_dir")


def test_determinism_step_compares_thread_counts(tmp_path, monkeypatch):
    monkeypatch.setattr(
        run_acceptance,
        "DETERMINISM_ARGV",
        ["clt", "--n", "40", "--q", "0.1", "--trials", "6", "--seed", "7"],
    )
    assert run_determinism(tmp_path, thread_counts=(1, 2, 3))
    assert (tmp_path / "determinism-t3.csv").exists()


def test_oracle_campaign_restricts_then_restores_suites(tmp_path):
    default_suites = list(settings.ORACLE_SUITES)
    campaign = Campaign(
        "oracles-small",
        ["oracle-suite", "--trials", "3", "--seed", "2"],
        {"aucun désaccord": run_acceptance._no_disagreement("triangles")},
        suites=["triangles"],
    )
    assert run_campaign(campaign, tmp_path, threads=1)
    assert settings.ORACLE_SUITES == default_suites


def test_campaign_fails_on_missing_result_key(tmp_path):
    campaign = Campaign(
        "sample-small",
        ["sample", "--n", "10", "--q", "0.5"],
        {"clé absente": lambda r: r["near_perfect"] >= 1},
    )
    assert not run_campaign(campaign, tmp_path, threads=1)


def test_criteria_sizes_are_the_defaults():
    assert settings.ORACLE_TRIANGLES_MAX_N == 12
    assert settings.ORACLE_CHROMATIC_MAX_N == 14
    assert settings.ORACLE_MARTINGALE_MAX_N == 16
    trials = {c.name: c.argv[c.argv.index("--trials") + 1] for c in run_acceptance.CAMPAIGNS}
    assert trials["oracles-triangles"] == "10000"
    assert trials["oracles-chromatic"] == trials["oracles-martingale"] == "1000"
