"""PID gain region certification package"""

__version__ = "1.0.0"
