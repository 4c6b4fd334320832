"""
Command-line interface (typer application in src.cli.main).
"""
