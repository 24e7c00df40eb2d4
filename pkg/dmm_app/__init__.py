'''Runtime for dataflow matrix machines over V-values.'''
import logging

from typing import Mapping, Optional
from flask.config import Config

__version__ = '0.1.0'

logger = logging.getLogger('dmm_app')

class AttrConfig(Config):
    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key)

    def __dir__(self):
        out = set(self.keys())
        out.update(super().__dir__())
        return sorted(out)

def init_config(
    overrides: Optional[Mapping] = None,
    root_path: str = '.',
)-> AttrConfig:
    '''Construct the configuration: defaults, settings file, environment, overrides.'''

    config = AttrConfig(root_path)

    config.from_object('config.Config')
    config.from_envvar('DMM_APP_SETTINGS', silent=True)
    config.from_prefixed_env(prefix='DMM_APP')

    if overrides:
        config.from_mapping(overrides)

    logger.debug(f'configuration loaded with keys {sorted(config.keys())}')

    return config
