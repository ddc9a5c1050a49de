"""
Tunable limits. Every cap can also be passed explicitly to the function that enforces it.
"""

import os

from dpbound.error_code import ParameterError

NODE_BUDGET_ENV = 'DPB_NODE_BUDGET'

DEFAULT_NODE_BUDGET = 10 ** 7
DEFAULT_COIN_CAP = 20
DEFAULT_SET_CAP = 2 ** 28  # entries in an exhaustive I or C; RR over 12 clients needs 12 * 2^24
DEFAULT_VALIDATION_CAP = 2 ** 16  # input/output pairs checked by the set validators
DEFAULT_BENCH_MAX_N = 12


def node_budget():
    value = os.environ.get(NODE_BUDGET_ENV)
    if value is None or value.strip() == '':
        return DEFAULT_NODE_BUDGET
    try:
        budget = int(value)
    except ValueError:
        raise ParameterError(f'{NODE_BUDGET_ENV} must be an integer, got {value!r}')
    if budget <= 0:
        raise ParameterError(f'{NODE_BUDGET_ENV} must be positive, got {budget}')
    return budget


def default_jobs():
    return os.cpu_count() or 1
