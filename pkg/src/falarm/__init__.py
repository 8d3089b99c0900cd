"""Differential-testing harness for ASR systems.

Synthesizes test audio through pluggable TTS engines, cross-references ASR
outputs against human-audio ground truth to confirm false alarms, and trains
a text-based estimator that flags texts likely to produce false alarms.
"""

__version__ = "0.1.0"
