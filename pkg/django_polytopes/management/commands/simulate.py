from django_polytopes.exceptions import InvalidArgument
from django_polytopes.extremal import ARC_GAP_UNIT, GAP_STATISTICS, STATISTICS, AggregateStat, aggregate
from django_polytopes.management.lab import LabCommand
from django_polytopes.reports import render_aggregate_csv, render_aggregate_json
from django_polytopes.sphere import RngStream


class Command(LabCommand):
    help = """Run the extremal-facet Monte-Carlo over every (n, N) pair and write one aggregate per pair."""

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--stat",
            dest="stat",
            default=None,
            help=f"Comma-separated statistics to keep. Defaults to all of {', '.join(STATISTICS + GAP_STATISTICS)}.",
        )

    def run(self, config, *args, **options):
        if not config.n_list or not config.N_list:
            raise InvalidArgument("simulate needs at least one value for both --n and --N")
        unknown = set(config.statistics) - set(STATISTICS + GAP_STATISTICS)
        if unknown:
            raise InvalidArgument(f"Unknown statistics: {', '.join(sorted(unknown))}")

        rng = RngStream(config.master_seed)
        stats = []
        for n in config.n_list:
            for N in config.N_list:
                stat = aggregate(rng, n, N, config.trials, config.threads, hull_method=config.hull_method)
                if config.statistics:
                    values = {name: value for name, value in stat.values.items() if name in config.statistics}
                    stat = AggregateStat(stat.n, stat.N, stat.trials, values, stat.resamples)
                stats.append(stat)

        metadata = config.metadata()
        if any(name in stat.values for stat in stats for name in GAP_STATISTICS):
            metadata["arc_gap_unit"] = ARC_GAP_UNIT
        render = render_aggregate_json if config.format == "json" else render_aggregate_csv
        self.emit(render(stats, metadata), config.out)
