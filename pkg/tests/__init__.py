"""Tests for the choose language toolkit."""
