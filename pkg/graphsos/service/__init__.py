"""Contains the use-cases of the pipeline and the ports they talk to."""
