import os

from pathlib import Path
from dotenv import load_dotenv

# Project root: manage.py lives here.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

load_dotenv(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = os.getenv('SECRET_KEY', 'lz-toolkit-local-only-key')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',

    'apps.hamiltonians.apps.HamiltoniansConfig',
    'apps.propagator.apps.PropagatorConfig',
    'apps.flatland.apps.FlatlandConfig',
    'apps.functional.apps.FunctionalConfig',
    'apps.experiments.apps.ExperimentsConfig',
]

# Internationalization
LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

TOOL_VERSION = '1.0.0'
