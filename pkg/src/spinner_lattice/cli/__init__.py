from .run_config import ConfigError, RunConfig, parse_config, serialize_config
