"""State-vector simulation of measure-then-interfere search, with Grover and
classical baselines."""

__version__ = "0.1.0"
