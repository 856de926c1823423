from django.apps import AppConfig


class FlatlandConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.flatland'
    verbose_name = 'Zero-curvature (t, tau) plane'
