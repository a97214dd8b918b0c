"""
Command line interface for twinbeam experiments
"""
