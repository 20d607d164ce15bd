"""Shared flags, configuration merging and error translation of the lab subcommands."""

import logging

from django.core.management.base import BaseCommand, CommandError

from django_polytopes.conf import FORMATS, HULL_METHODS, ExperimentConfig, float_list, int_list, str_list
from django_polytopes.exceptions import PolytopeLabError

logger = logging.getLogger("django_polytopes.cli")

USAGE_ERROR = 2
CHECK_FAILURE = 1

# flag name -> parser for the raw command-line string
LIST_FLAGS = {"n": int_list, "N": int_list, "stat": str_list, "grid": float_list}
# options that map onto ExperimentConfig fields
FLAG_KEYS = ("n", "N", "trials", "seed", "threads", "out", "format", "stat", "grid", "samples", "model", "hull_method")


class ChecksFailed(Exception):
    """Raised by a subcommand whose checks ran to completion but did not all pass."""


class LabCommand(BaseCommand):
    """
    Base for the lab subcommands.

    Every subcommand accepts the common experiment flags and a ``--config`` file; the merged
    options reach :meth:`run` as an ``ExperimentConfig``. Lab errors and I/O failures exit with
    status 2, failed checks with status 1.
    """

    # False leaves an unset trial count to the command
    trial_default = True

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            dest="config",
            default=None,
            help="Flat 'key = value' file mirroring the long flags; flags given on the command line win.",
        )
        parser.add_argument("--n", dest="n", default=None, help="Comma-separated sphere dimensions, e.g. 2,3.")
        parser.add_argument("--N", dest="N", default=None, help="Comma-separated point counts, e.g. 100,1000.")
        parser.add_argument("--trials", dest="trials", type=int, default=None, help="Monte-Carlo trials per point.")
        parser.add_argument("--seed", dest="seed", type=int, default=None, help="Master seed of every random stream.")
        parser.add_argument(
            "--threads",
            dest="threads",
            type=int,
            default=None,
            help="Worker threads. Results do not depend on this.",
        )
        parser.add_argument("--out", dest="out", default=None, help="Output path. Defaults to standard output.")
        parser.add_argument("--format", dest="format", choices=FORMATS, default=None, help="Output format.")
        parser.add_argument(
            "--hull-method",
            dest="hull_method",
            choices=HULL_METHODS,
            default=None,
            help="Hull engine. auto (the default) switches to qhull from POLYTOPES_HULL_AUTO_POINTS points on.",
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def flags(self, options):
        """The experiment flags of ``options``, list flags parsed, None where not given."""
        flags = {}
        for key in FLAG_KEYS:
            value = options.get(key)
            if value is not None and key in LIST_FLAGS:
                value = LIST_FLAGS[key](value)
            flags[key] = value
        return flags

    def extra(self, options):
        """Command-specific options that belong in the config hash."""
        return {}

    def handle(self, *args, **options):
        try:
            config = ExperimentConfig.merge(
                self.command_name(),
                self.flags(options),
                options.pop("config", None),
                trial_default=self.trial_default,
                extra=self.extra(options),
            )
            self.run(config, *args, **options)
        except ChecksFailed as exc:
            raise CommandError(str(exc), returncode=CHECK_FAILURE) from exc
        except (PolytopeLabError, OSError) as exc:
            logger.error("%s failed: %s", self.command_name(), exc)
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc

    def command_name(self):
        return self.__module__.rsplit(".", 1)[-1]

    def run(self, config, *args, **options):
        raise NotImplementedError

    def emit(self, text, path=None):
        """Write ``text`` to ``path``, or to the command's stdout when no path is given."""
        if path is None:
            self.stdout.write(text, ending="")
            return
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("wrote %s", path)
