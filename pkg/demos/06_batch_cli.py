"""
Batch runs from the command line
================================

The same recipes are available as ``parqsim <subcommand>``; this script
drives them in-process and prints the CSV.
"""

from parqsim import cli

cli.main(["ht-decay", "--n", "6", "--p", "1e-2", "--k", "6", "--trials", "50", "--seed", "1"])
cli.main(["shor", "--N", "143,899", "--runs", "10", "--improvements", "all"])
cli.main(["bench", "--kind", "qft", "--n", "14", "--workers", "1", "--repeats", "3"])
