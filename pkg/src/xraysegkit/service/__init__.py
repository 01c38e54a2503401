from .app import ApiError, AnnotationSession, create_app

__all__ = ["ApiError", "AnnotationSession", "create_app"]
