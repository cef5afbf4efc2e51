"""Bergman kernels of cusp forms, heat-kernel bound machinery and desk-scale checks."""
