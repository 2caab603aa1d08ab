from .app import create_app, load_tokens  # noqa: F401
