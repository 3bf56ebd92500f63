"""
Library defaults, overridable through the ENTROKEY dict in Django settings.
"""

import os

from django.conf import settings

DEFAULTS = {
    'OUT_DIR': 'entrokey-out',
    'SEED': 42,
    'ALPHA_MIN': 1.0,
    'ALPHA_MAX': 3.75,
    'ALPHA_STEP': 0.25,
    'K_FOLDS': 10,
    'C': 3.0,
    'EPOCHS': 50,
    'LEARNING_RATE': 1.0,
    'TOLERANCE': 1e-6,
    'MAX_WORD_LEN': 6,
    'TOP_N': 20,
    'RECORD_RUNS': True,
}


def get_setting(name):
    overrides = getattr(settings, 'ENTROKEY', {})
    return overrides.get(name, DEFAULTS[name])


def output_dir(requested=None):
    """ENTROKEY_OUT wins over a requested directory, which wins over settings."""
    return os.environ.get('ENTROKEY_OUT') or requested or get_setting('OUT_DIR')
