from django.apps import AppConfig


class EntrokeyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'entrokey'
    verbose_name = 'Entropy Keywords'
