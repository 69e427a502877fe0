"""Adaptive federated learning over a fading, heavy-tailed analog channel.

Simulation of AdaGrad-OTA / Adam-OTA / FedAvgM server optimizers fed by an
over-the-air aggregated gradient, plus closed-form bound evaluation and the
inequality oracles used to test them.
"""

__version__ = "0.1.0"
