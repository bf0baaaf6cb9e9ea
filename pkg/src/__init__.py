# Bayesian depth fusion: geometry, consistency checks, filter, metrics, CLI and HTTP API
