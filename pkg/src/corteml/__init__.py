"""EEG cortical-asymmetry features and empathy-score models.

Library layout:
  signal    raw recordings, band-pass filter, segmentation
  spectral  Welch band powers, log-power asymmetry, outlier exclusion
  featsel   five-method feature ranking, aggregation, correlations
  statmath  special functions and distribution CDFs
  models    OLS (+diagnostics), logistic, SVM, decision tree, grid search
  evaluate  label schemes, cross-validation, metrics, pipeline harness
  synth     synthetic cohorts with a planted asymmetry-score coupling
  cli       the `corteml` command
"""

from .errors import ComputeError, CortemlError, DataError

__version__ = "0.1.0"

__all__ = ["ComputeError", "CortemlError", "DataError", "__version__"]
