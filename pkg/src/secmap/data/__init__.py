"""Packaged seed data: catalog, scenario, and profile fixtures."""
