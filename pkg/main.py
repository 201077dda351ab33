"""
hybridop entry point.

Loads .env before anything reads settings, then hands over to hybridop.main.
"""

import sys
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables FIRST, before any other imports
env_path = Path(__file__).parent / ".env"
load_dotenv(env_path)

if __name__ == "__main__":
    from hybridop.main import main

    sys.exit(main())
