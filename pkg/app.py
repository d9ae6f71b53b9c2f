#!/usr/bin/env python3
import sys

from fraccalc.cli import main

sys.exit(main())
