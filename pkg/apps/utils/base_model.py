from django.db import models


class AbstractBaseModel(models.Model):
    """
    Abstract base model with creation and update timestamps for persisted results.
    """
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True
        get_latest_by = 'created_at'

    def __str__(self):
        return f"{self.__class__.__name__} (ID: {self.pk}, created {self.created_at})"
