"""Contains code gluing the adapters to files, http and the command line."""
