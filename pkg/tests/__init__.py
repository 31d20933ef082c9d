"""Test package for the STL task decomposition toolkit."""
