class ConfigError(ValueError):
    """Invalid configuration value or file; maps to CLI exit code 1."""
