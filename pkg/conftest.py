# Wire the Django test project (tests/manage.py, tox.ini) into plain pytest.
import os
import sys

import django

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "tests"))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "test_project.settings.ci")
django.setup()
