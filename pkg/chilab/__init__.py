from chilab.core.config import settings

__version__ = settings.PROJECT_VERSION
