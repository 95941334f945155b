"""
Channel generators for simulated STAR-RIS links
"""

from .channel_generator import ChannelSet, generate_channels, pathloss_linear

__all__ = ["ChannelSet", "generate_channels", "pathloss_linear"]
