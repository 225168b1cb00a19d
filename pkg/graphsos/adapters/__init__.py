"""Contains code translating between the use-cases and the outside world."""
