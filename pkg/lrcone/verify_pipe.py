"""
Runs the full verification campaign and writes report.csv, summary.json and
violations.log into the output directory.
"""
import logging
import os

from lrcone.checks import VerificationPipeline, VerificationReport
from lrcone.config import RunConfig
from lrcone.emit import emit, write_json


def verify_all(config: RunConfig, workers: int | None = None, out_dir: str | None = None,
               progress: bool = True) -> tuple[VerificationReport, int]:
    """Returns the report and the process exit code (0 when every check passed, 1 otherwise)."""
    out_dir = out_dir or config.output.directory
    os.makedirs(out_dir, exist_ok=True)
    violation_log_path = os.path.join(out_dir, 'violations.log')

    violation_logger = logging.getLogger('lrcone.violations')
    violation_logger.setLevel(logging.WARNING)
    fh = logging.FileHandler(violation_log_path, mode='w', encoding='utf-8')
    fh.setLevel(logging.WARNING)
    formatter = logging.Formatter('%(asctime)s - CHECK: %(message)s', datefmt='%Y-%m-%d %H:%M:%S')
    fh.setFormatter(formatter)
    violation_logger.addHandler(fh)

    try:
        report = VerificationPipeline.get_default_pipeline().run(config, workers=workers, progress=progress)
    finally:
        violation_logger.removeHandler(fh)
        fh.close()

    emit(report.table(), ["csv"], out_dir)
    summary_path = write_json(report.summary, os.path.join(out_dir, 'summary.json'))
    summary = report.summary

    print("\n--- Verification Complete ---")
    print(f"✅ {summary['passed']} of {summary['checks']} checks passed in {summary['wall_time_s']:.1f}s.")
    print(f"   Minimum margin: {summary['min_margin']:.6g}")
    if summary['failed'] > 0:
        print(f"❌ {summary['failed']} checks failed in: {', '.join(summary['failed_checks'])}")
        for row in report.worst_failures():
            print(f"   {row.check} at {row.point}: measured={row.measured:.17g} bound={row.bound:.17g} "
                  f"margin={row.margin:.6g}")
        print(f"   See the full list of violations in the log file: {violation_log_path}")
    print(f"   Summary written to: {summary_path}")
    print("-----------------------")
    return report, 0 if report.passed else 1
