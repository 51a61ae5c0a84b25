"""mcqforge: multi-agent MCQ generation and review for AI-literacy assessment."""

__version__ = "0.1.0"
