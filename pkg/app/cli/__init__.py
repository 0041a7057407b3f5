"""Command line of the fqi-air harness"""
