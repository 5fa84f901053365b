"""Scenario files, run artifacts, grid dumps and heatmaps."""
from .dump import DumpFormatError, read_dump, write_dump
from .scenario import (GridSizeError, RegionError, Scenario, ScenarioError, ScenarioParseError,
                       load_scenario, parse_text)
