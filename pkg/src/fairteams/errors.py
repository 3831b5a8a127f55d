class ValidationError(ValueError):
    """Invalid user input: instance data, config values, or file contents."""
