
class Config(object):

    DEBUG = False
    LOG_LEVEL = 'INFO'
    LOG_FILE = None
    LOG_MAX_BYTES = 100000
    LOG_BACKUP_COUNT = 10

    DEFAULT_STEPS = 10
    DEFAULT_SEED = 0
    DEFAULT_ACTIVITY_RULE = 'input-or-output'
    SNAPSHOT_EVERY = 0
    TRACE_FILE = 'trace.jsonl'

    SELF_FN = 'accum'
    SELF_NEURON = 'self'
    SELF_OUTPUT = 'single'

    PRUNE_EPSILON = 0.0
    #PRUNE_EPSILON = 1e-12

    #LOG_FILE = 'dmm_app.log'
    #DMM_APP_SETTINGS = '/etc/dmm_app/settings.py'
