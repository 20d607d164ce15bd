# Django settings for test_project project.

DEBUG = True

TEST_RUNNER = "django.test.runner.DiscoverRunner"

# The lab keeps no state, so the test project runs without a database.
DATABASES = {}

DEFAULT_AUTO_FIELD = "django.db.models.AutoField"

ALLOWED_HOSTS = []

TIME_ZONE = "UTC"

LANGUAGE_CODE = "en-us"

USE_I18N = True

USE_TZ = True

# Make this unique, and don't share it with anybody.
SECRET_KEY = "z)9k+gxz%8pyppdd6%76t(z+c2wg=*%@nn#r((-#iv+cjj8=l="

INSTALLED_APPS = (
    "django_polytopes",
    "test_project.coretest",
    "test_project.capstest",
    "test_project.hulltest",
    "test_project.simplextest",
    "test_project.extremaltest",
    "test_project.boundstest",
    "test_project.clitest",
)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {
        "console": {"class": "logging.StreamHandler"},
    },
    "loggers": {
        "django_polytopes": {"level": "INFO", "handlers": ["console"]},
    },
}

POLYTOPES_MASTER_SEED = 20240601
POLYTOPES_SLOW_TESTS = False
