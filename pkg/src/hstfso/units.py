"""Decibel and unit helpers shared across the link budget."""

import math


def watts_to_dbm(p_w):
    return 10.0 * math.log10(p_w * 1e3)


def dbm_to_watts(p_dbm):
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def to_db(ratio):
    return 10.0 * math.log10(ratio)


def from_db(db):
    return 10.0 ** (db / 10.0)


def diameter_from_area(area_m2):
    """Circular aperture diameter for a given collecting area."""
    return 2.0 * math.sqrt(area_m2 / math.pi)


KMH_TO_MPS = 1000.0 / 3600.0
