"""Reproduce every acceptance sweep into the report directory (HYPERJAC_REPORT_DIR)."""

import logging
from fractions import Fraction

from hyperjac.config import get_settings
from hyperjac.experiments import FamilyConfig, dumps, radial_integral_lemma410, run_family, run_lemma_suite, write_report
from hyperjac.experiments.lemma410 import coefficient_identity_holds
from hyperjac.log import setup_logging
from hyperjac.signal import radial_profile

setup_logging()
logger = logging.getLogger("hyperjac.main")
settings = get_settings()
report_dir = settings.report_dir
summary = {}

# ================================
# Identity suites: determinants, minors, extension identity, difference bound
suite_reports = {}
for workers in (1, 4):
    report = run_lemma_suite(settings.seed, 200, "all", workers)
    write_report(report, report_dir, f"lemma_suite_workers{workers}")
    summary[f"lemma_suite_workers{workers}"] = report["passed"]
    suite_reports[workers] = dumps(report)
summary["lemma_suite_worker_independent"] = suite_reports[1] == suite_reports[4]

# ================================
# Rate sweeps
SWEEPS = [
    dict(family="prop45", N=2, m=2, r=2, rho="3/4", s="1/2", p=3, ks=(8, 16, 32, 64, 128, 256)),
    dict(family="thm411case2", N=2, m=2, r=2, rho="3/5", s="1/2", p=3, ks=(8, 16, 32, 64, 128, 256)),
    dict(family="prop49", N=3, m=2, r=2, s="1/2", p="3/2", ks=(4, 8, 16, 32, 64)),
    dict(family="prop47", N=2, m=2, r=2, s=1, p=3, ks=(2, 3)),
    dict(family="thm411case3", N=3, m=2, r=3, s=1, p=3, ks=(2, 3)),
]

for values in SWEEPS:
    cfg = FamilyConfig.build(**values)
    exp = run_family(cfg, workers=settings.workers, progress=True)
    write_report(exp, report_dir)
    summary[cfg.family] = exp.passed
    logger.info("%s: %s", cfg.family, exp.verdicts)

# ================================
# Radial identity for the scaled family's profile
identity = radial_integral_lemma410(radial_profile(), N=3, r=2, s=2)
identity_report = {
    "family": "radial_identity",
    **identity.to_dict(),
    "coefficient_identity": coefficient_identity_holds(3, 2, Fraction(2)),
    "passed": abs(identity.ratio - 1.0) <= 0.02,
}
write_report(identity_report, report_dir, "radial_identity")
summary["radial_identity"] = identity_report["passed"] and identity_report["coefficient_identity"]

# ================================
for name, passed in summary.items():
    logger.info("%-32s %s", name, "pass" if passed else "FAIL")
