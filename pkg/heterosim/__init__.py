"""heterosim - predictor measurement heterogeneity in logistic prediction models."""

__version__ = "0.1.0"
