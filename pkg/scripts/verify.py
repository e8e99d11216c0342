"""Runs the assumption chain on a model and reports every audit."""

from argparse import Namespace
import logging
import sys

from scripts import run
from scripts.common.config.build import model_from
from scripts.common.config.schema import RunConfig, VerifySection
from scripts.common.models.model import ModelSpec
from scripts.common.models.modulus import ModulusSpec
from scripts.common.verify.audits import (
    audit_coercivity, audit_lyapunov, audit_monotonicity, audit_osgood, audit_ratio, integrability_report,
)
from scripts.common.verify.report import Assumption, AuditReport, report_table

log = logging.getLogger(__name__)


def audit_chain(model: ModelSpec, section: VerifySection, seed: int, threads: int = 1) -> list[AuditReport]:
    """Integrability, monotonicity, Lyapunov and trace, ratio and Osgood checks, in that order.

    Audits whose bundle the model does not carry are skipped.
    """
    reports = [integrability_report(model, section.R, section.n_t, section.n_x, seed)]

    bundle = model.monotonicity
    if bundle is not None:
        eps0 = bundle.eps0 if section.eps0 is None else section.eps0
        eta = bundle.eta(section.R)
        reports.append(audit_monotonicity(model, section.R, section.n_pairs, seed, section.tol, eps0, threads))
        reports.append(audit_ratio(eta, eps0, section.ratio_n_c, section.ratio_n_s, Assumption.RATIO_ETA))
        if section.osgood:
            reports.append(audit_osgood(eta, Assumption.OSGOOD_ETA, eps0))
    else:
        log.debug(f"{model.name}: no monotonicity bundle, skipping its audits")

    lyapunov = model.lyapunov
    if lyapunov is not None:
        reports.extend(audit_lyapunov(model, section.region_radius, section.n_points, seed, section.tol, threads))
        reports.append(audit_ratio(lyapunov.gamma, section.gamma_cap, section.ratio_n_c, section.ratio_n_s,
                                   Assumption.RATIO_GAMMA))
        if section.osgood:
            reports.append(audit_osgood(lyapunov.gamma, Assumption.OSGOOD_GAMMA, 1.0))
        if section.coercivity:
            reports.append(audit_coercivity(model, seed=seed))
    else:
        log.debug(f"{model.name}: no Lyapunov bundle, skipping its audits")

    if section.modulus is not None:
        reports.append(audit_ratio(ModulusSpec.parse(section.modulus), section.modulus_cap,
                                   section.ratio_n_c, section.ratio_n_s, Assumption.RATIO_GAMMA))
    return reports


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    reports = audit_chain(model, config.verify, config.run.seed, config.run.threads)
    columns, rows = report_table(reports)
    run.emit(config, args, ("verify", columns, rows))

    for report in reports:
        print(report.summary())
    failed = [r.assumption.value for r in reports if not r.passed]
    print(f"Verified {model.name}: {len(reports) - len(failed)}/{len(reports)} audits passed"
          + (f", failed {', '.join(failed)}." if failed else "."))
    return run.EXIT_AUDIT_FAILED if failed else run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "verify", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
