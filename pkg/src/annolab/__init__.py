"""annolab: annotation campaigns, agreement statistics, ordinal classifier
heads and forum flagging for comment moderation."""

__version__ = "0.1.0"
