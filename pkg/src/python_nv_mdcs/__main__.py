import sys

from src.python_nv_mdcs.business.cli import main

if __name__ == "__main__":
    sys.exit(main())
