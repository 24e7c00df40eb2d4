#!/usr/bin/env python
'''Command-line entry point.'''
import logging
import sys

from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from dmm_app import init_config
from dmm_app.cli import main, setup_logging

logger = logging.getLogger('dmm_app')

if __name__ == '__main__':

    config = init_config()
    setup_logging(config)

    sys.exit(main(sys.argv[1:], config))
