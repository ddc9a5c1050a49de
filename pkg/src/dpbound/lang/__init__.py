"""
The .dpp language: abstract syntax, parser, validator and renderer
"""

from dpbound.lang.model import *  # noqa: F401,F403
from dpbound.lang.parser import parse, parse_file
from dpbound.lang.validator import ValidatedProgram, validate
from dpbound.lang.generator import render_program, write_program
