"""
Manifest, model and matrix file formats.
"""
