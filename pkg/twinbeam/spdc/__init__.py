"""
The package provides the modules used to model, propagate, image and count
signal/idler fields generated by parametric down-conversion, together with the
plane-wave-pump analytics used to check them.
"""
