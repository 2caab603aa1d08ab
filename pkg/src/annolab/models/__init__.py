from . import heads, train, features  # noqa: F401
