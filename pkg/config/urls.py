"""
URL configuration for the entrokey project: the admin site browses the run registry.
"""

from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
