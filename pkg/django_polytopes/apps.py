import logging

from django import apps

logger = logging.getLogger("django_polytopes.verify")


def log_check(sender, report, **kwargs):
    """Log every finished verification check."""
    if report.status == "pass":
        logger.info(
            "check %s (%s): pass, bound %.6g, empirical %.6g",
            report.bound_name,
            report.params_label(),
            report.bound_value,
            report.empirical_value,
        )
    else:
        logger.warning(
            "check %s (%s): %s, bound %.6g, empirical %.6g +- %.3g",
            report.bound_name,
            report.params_label(),
            report.status,
            report.bound_value,
            report.empirical_value,
            report.empirical_stderr,
        )


class PolytopesConfig(apps.AppConfig):
    """
    The base configuration for Django Polytopes. We use this to hook the
    check logger onto the verification signals.
    """

    name = "django_polytopes"
    verbose_name = "Django Spherical Polytopes"

    def ready(self):
        from django_polytopes.conf import lab_setting
        from django_polytopes.signals import check_completed

        if lab_setting("LOG_CHECKS"):
            check_completed.connect(log_check, dispatch_uid="django_polytopes.log_check")
