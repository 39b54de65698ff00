"""Data ingestion, run configuration, simulation designs and the Monte Carlo study runner."""
