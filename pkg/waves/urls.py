from django.urls import path, include
from rest_framework.routers import DefaultRouter
from waves.views import ExperimentRunViewSet, StationaryRecordViewSet

# Create a router for the API, which will automatically generate URL patterns for the viewsets
router = DefaultRouter()
router.register(r'runs', ExperimentRunViewSet)  # Recorded runs, their energy logs and snapshots
router.register(r'stationary', StationaryRecordViewSet)  # Stored stationary family

urlpatterns = [
    path('', include(router.urls)),
]
