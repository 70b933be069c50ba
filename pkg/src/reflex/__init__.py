"""Frame-incremental conversational decision engine.

Streams of timestamped dialogue events (voice activity edges, recognized
words, prosody frames, listener behaviors) drive per-frame backchannel
decisions, TRP-based turn-taking through a finite-state turn machine,
listener response / interview question generation, and rolling engagement
estimation.  The same engine core runs deterministic corpus replay and
live gateway sessions.
"""

__version__ = "0.1.0"
