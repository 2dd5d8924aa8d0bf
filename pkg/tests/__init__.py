"""Test package for metabelian-completion."""
