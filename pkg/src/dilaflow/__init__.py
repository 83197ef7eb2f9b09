"""Dilation surface flow toolkit."""
