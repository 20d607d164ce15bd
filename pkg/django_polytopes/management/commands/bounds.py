from django_polytopes.bounds import EVALUATORS, tabulate
from django_polytopes.exceptions import InvalidArgument
from django_polytopes.management.lab import LabCommand
from django_polytopes.reports import render_table_csv, render_table_json


class Command(LabCommand):
    help = """Tabulate an analytic bound over the n x N x grid product."""

    def add_command_arguments(self, parser):
        parser.add_argument("bound", help=f"One of: {', '.join(EVALUATORS)}.")
        parser.add_argument("--grid", dest="grid", default=None, help="Comma-separated t or delta values.")

    def extra(self, options):
        return {"bound": options["bound"]}

    def run(self, config, *args, bound=None, **options):
        if bound not in EVALUATORS:
            raise InvalidArgument(f"Unknown bound {bound!r}, expected one of {', '.join(EVALUATORS)}")
        evaluator = EVALUATORS[bound]
        if not config.n_list:
            raise InvalidArgument("bounds needs at least one value for --n")
        if evaluator.needs_N and not config.N_list:
            raise InvalidArgument(f"{bound} needs at least one value for --N")
        if evaluator.grid_name and not config.grid:
            raise InvalidArgument(f"{bound} needs --grid values for {evaluator.grid_name}")

        rows = tabulate(bound, config.n_list, config.N_list, config.grid)
        render = render_table_json if config.format == "json" else render_table_csv
        self.emit(render(rows, config.metadata()), config.out)
