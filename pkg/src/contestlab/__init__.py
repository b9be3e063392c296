"""contestlab: contest models, tournament simulation, and the estimation stack."""

__version__ = "0.1.0"
