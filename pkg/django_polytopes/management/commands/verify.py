from collections import Counter

from django_polytopes.checks import SUITES, SuiteOptions, run_suite
from django_polytopes.management.lab import ChecksFailed, LabCommand
from django_polytopes.reports import render_json


class Command(LabCommand):
    help = """Run a verification suite and write a JSON report of every check. Exits with status 1 if a check fails."""

    trial_default = False

    def add_command_arguments(self, parser):
        parser.add_argument("suite", help=f"One of: {', '.join(SUITES)}.")
        parser.add_argument(
            "--samples",
            dest="samples",
            type=int,
            default=None,
            help="Monte-Carlo samples for the sampling checks. Defaults to each suite's own budget.",
        )

    def extra(self, options):
        return {"suite": options["suite"]}

    def run(self, config, *args, suite=None, **options):
        reports = run_suite(
            suite,
            config.master_seed,
            SuiteOptions(
                n_list=config.n_list or None,
                N_list=config.N_list or None,
                trials=config.trials,
                samples=config.samples,
                threads=config.threads,
                hull_method=config.hull_method,
            ),
        )
        counts = Counter(report.status for report in reports)
        payload = {
            "metadata": config.metadata(),
            "suite": suite,
            "summary": {status: counts.get(status, 0) for status in ("pass", "fail", "inconclusive")},
            "reports": [report.to_dict() for report in reports],
        }
        self.emit(render_json(payload), config.out)
        if counts.get("fail"):
            raise ChecksFailed(f"{counts['fail']} of {len(reports)} checks in suite {suite!r} failed")
