"""Domain models."""
from qrnn.models.density import DensityMatrix, HermitianObservable
from qrnn.models.architecture import QrnnArchitecture, QrnnParameters, QrnnState
from qrnn.models.series import TimeSeries
from qrnn.models.gradient import GradientVector, SensitivityState
from qrnn.models.training import TrainConfig, TrainResult
from qrnn.models.lindblad import LindbladSystem
from qrnn.models.experiment import ExperimentConfig, SweepResultRow

__all__ = [
    'DensityMatrix',
    'HermitianObservable',
    'QrnnArchitecture',
    'QrnnParameters',
    'QrnnState',
    'TimeSeries',
    'GradientVector',
    'SensitivityState',
    'TrainConfig',
    'TrainResult',
    'LindbladSystem',
    'ExperimentConfig',
    'SweepResultRow'
]
