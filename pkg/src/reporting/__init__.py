"""Reporting subpackage.

Turns experiment results into tidy summaries, Jinja2-rendered text reports
and SVG figures.
"""
