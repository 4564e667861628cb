# Services package

from .instance_handler import InstanceHandler, InstanceGenerator
from .pipeline import SolvePipeline
from .report_writer import ReportWriter

__all__ = ["InstanceHandler", "InstanceGenerator", "SolvePipeline", "ReportWriter"]
