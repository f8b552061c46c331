import sys

from prosthetics.harness.cli import main

sys.exit(main())
