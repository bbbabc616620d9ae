"""Feedback-adaptive personalized review summarization."""

__version__ = "0.1.0"
