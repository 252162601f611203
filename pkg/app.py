"""
Main application entry point for the cubic Newton toolkit.
Configures logging and the environment, then hands over to the benchmark CLI.

Usage:
    python app.py solve --method fo --problem rosenbrock --m 2
    python app.py bench --methods fo,zo --m 1,n,2n --out ./results
"""
import logging
import os
import sys

# Setup logging first
log_level = os.getenv("LOG_LEVEL", "INFO")
logging.basicConfig(level=getattr(logging, log_level.upper(), logging.INFO))
logger = logging.getLogger(__name__)

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from benchmark.cli import cli_main

if __name__ == "__main__":
    sys.exit(cli_main())
