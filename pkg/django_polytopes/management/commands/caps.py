from django_polytopes.caps import build_cap_packing, cap_angle_from_fraction, cap_area_bounds, cap_from
from django_polytopes.exceptions import InvalidArgument
from django_polytopes.management.lab import LabCommand
from django_polytopes.reports import render_table_csv, render_table_json
from django_polytopes.sphere import RngStream

PARAMETRISATIONS = ("offset", "height", "angle", "fraction")


class Command(LabCommand):
    help = """Cap calculator: convert between cap parametrisations, bound cap angles and build cap packings."""

    def add_command_arguments(self, parser):
        for name in PARAMETRISATIONS:
            parser.add_argument(f"--{name}", dest=name, type=float, default=None, help=f"Describe the cap by its {name}.")
        parser.add_argument(
            "--R",
            dest="R",
            type=float,
            default=None,
            help="Area fraction denominator: report the angle of the cap with area |S^{n-1}| / R and its bounds.",
        )
        parser.add_argument(
            "--packing",
            action="store_true",
            dest="packing",
            default=False,
            help="With --R, also pack the sphere with disjoint caps of that area.",
        )

    def extra(self, options):
        return {name: options.get(name) for name in (*PARAMETRISATIONS, "R", "packing")}

    def run(self, config, *args, R=None, packing=False, **options):
        if not config.n_list:
            raise InvalidArgument("caps needs at least one value for --n")
        given = {name: options[name] for name in PARAMETRISATIONS if options.get(name) is not None}
        if len(given) > 1:
            raise InvalidArgument("Give at most one of --offset, --height, --angle or --fraction")
        if not given and R is None:
            raise InvalidArgument("Give a cap (--offset, --height, --angle or --fraction) or --R")
        if packing and R is None:
            raise InvalidArgument("--packing needs --R")

        rows = []
        for n in config.n_list:
            if given:
                rows.append(self.cap_row(n, given))
            if R is not None:
                rows.append(self.fraction_row(n, R))
            if packing:
                rows.append(self.packing_row(RngStream(config.master_seed).child(n), n, R))

        render = render_table_json if config.format == "json" else render_table_csv
        self.emit(render(rows, config.metadata()), config.out)

    def cap_row(self, n, given):
        cap = cap_from(n, **given)
        row = {
            "kind": "cap",
            "n": n,
            "offset": cap.offset,
            "height": cap.height,
            "angle": cap.angle,
            "radius": cap.radius,
            "area": cap.area,
            "fraction": cap.fraction,
        }
        if n >= 4 and 0.0 < cap.offset <= 1.0:
            row["area_lower"], row["area_upper"] = cap_area_bounds(n, cap.offset)
        return row

    def fraction_row(self, n, R):
        angle, lower, upper = cap_angle_from_fraction(n, R)
        return {"kind": "fraction", "n": n, "R": R, "angle": angle, "angle_lower": lower, "angle_upper": upper}

    def packing_row(self, rng, n, R):
        result = build_cap_packing(rng, n, R)
        return {
            "kind": "packing",
            "n": n,
            "R": R,
            "caps": len(result),
            "count_lower": 3.0**-n * R,
            "min_center_angle": result.min_center_angle(),
            "cap_angle": result.caps[0].angle,
        }
