from evodepth.models.panel import Grid, CurveSample, MeterPanel, LongRecord
from evodepth.models.depth import DepthKind, DepthValues
from evodepth.models.spline import SplineFit
from evodepth.models.scenario import GpConfig, SimModel, SimScenario, LabeledPanel
from evodepth.models.report import Method, DepthPanel, Prototype, DetectionReport
from evodepth.models.benchmark import BenchmarkResult

__all__ = [
    'Grid', 'CurveSample', 'MeterPanel', 'LongRecord',
    'DepthKind', 'DepthValues', 'SplineFit',
    'GpConfig', 'SimModel', 'SimScenario', 'LabeledPanel',
    'Method', 'DepthPanel', 'Prototype', 'DetectionReport',
    'BenchmarkResult',
]
