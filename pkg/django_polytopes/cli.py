"""
The ``polylab`` console script: the lab subcommands without a Django project.

Configures a minimal settings object (no database) unless ``DJANGO_SETTINGS_MODULE`` points at
a real project, then hands the command line to Django's management utility.
"""

import os
import sys

import django
from django.conf import settings
from django.core.management import ManagementUtility

LAB_SETTINGS = {
    "DATABASES": {},
    "INSTALLED_APPS": ["django_polytopes"],
    "USE_TZ": True,
    "LOGGING": {
        "version": 1,
        "disable_existing_loggers": False,
        "handlers": {"console": {"class": "logging.StreamHandler"}},
        "loggers": {"django_polytopes": {"level": "INFO", "handlers": ["console"]}},
    },
}


def main(argv=None):
    argv = list(sys.argv if argv is None else argv)
    if not settings.configured and "DJANGO_SETTINGS_MODULE" not in os.environ:
        settings.configure(**LAB_SETTINGS)
    django.setup()
    ManagementUtility(argv).execute()


if __name__ == "__main__":
    main()
