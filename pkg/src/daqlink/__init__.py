"""Software model of a 120-bit, BCH(15,7,2)-protected DAQ serial link."""

__version__ = "0.1.0"
