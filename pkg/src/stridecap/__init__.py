"""Scene-level instructional captions from frame windows with dynamic-stride redundancy removal."""

__version__ = "0.1.0"
