import csv
import io

from django_polytopes.management.lab import ChecksFailed, LabCommand
from django_polytopes.reports import metadata_lines, read_aggregate_rows, render_json
from django_polytopes.scaling import MODELS, fit_rows

PLOT_HEADER = ["n", "stat", "N", "mean", "stderr", "model"]


class Command(LabCommand):
    help = """Fit E[stat] against N for aggregate files written by simulate, one fit per dimension and statistic."""

    def add_command_arguments(self, parser):
        parser.add_argument("inputs", nargs="+", help="Aggregate CSV or JSON files.")
        parser.add_argument("--model", dest="model", choices=MODELS, default=None, help="Scaling model (power).")
        parser.add_argument("--stat", dest="stat", default=None, help="Comma-separated statistics to fit.")
        parser.add_argument(
            "--plot-out",
            dest="plot_out",
            default=None,
            help="Also write the fitted points and model values as CSV for plotting.",
        )

    def extra(self, options):
        return {"inputs": list(options["inputs"])}

    def run(self, config, *args, inputs=(), plot_out=None, **options):
        rows = []
        for path in inputs:
            rows.extend(read_aggregate_rows(path))
        fits = fit_rows(rows, config.model or "power", list(config.statistics) or None)

        metadata = config.metadata()
        self.emit(render_json({"metadata": metadata, "fits": [fit.to_dict() for fit in fits]}), config.out)
        if plot_out:
            self.emit(self.render_plot(fits, metadata), plot_out)

        failed = [f"{fit.statistic} (n={fit.n})" for fit in fits if fit.status == "fail"]
        if failed:
            raise ChecksFailed(f"Fits outside the expected window: {', '.join(failed)}")

    def render_plot(self, fits, metadata):
        buffer = io.StringIO()
        for line in metadata_lines(metadata):
            buffer.write(line + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(PLOT_HEADER)
        for fit in fits:
            for row in fit.plot_rows():
                writer.writerow([fit.n, fit.statistic, *row])
        return buffer.getvalue()
