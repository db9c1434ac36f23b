"""fairlens: audit, explain, and remedy unfairness in tabular classifiers."""

__version__ = "0.1.0"

from . import dataset, explain, metrics, models, remedy, sampler, store, sweep  # noqa: F401
