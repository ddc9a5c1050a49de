"""
Exact differential privacy and accuracy bounds for small probabilistic programs.

Programs are compiled to binary decision diagrams; weighted model counting gives their
exact output distributions, from which tight e^epsilon and 1 - beta values are read.
"""

from dpbound.version import __version__
from dpbound.error_code import DpBoundError
from dpbound.lang import parse, parse_file, validate
from dpbound.compiler import compile_program, joint_distribution, prob_of
from dpbound.mechanisms import above_threshold, from_program, rr, rrcount
from dpbound.synthesis import accuracy_bound, privacy_bound, synthesize_accuracy, synthesize_privacy
