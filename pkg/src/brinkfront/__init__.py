"""brinkfront: tumor front propagation under the Brinkman cell density model."""

__version__ = "0.1.0"
