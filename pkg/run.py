import sys

from src.app import main

# To use `python run.py <command> ...`
if __name__ == "__main__":
    sys.exit(main())
