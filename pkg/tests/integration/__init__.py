"""Integration tests for Docker Compose deployment."""
