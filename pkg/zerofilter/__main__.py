import sys

from zerofilter.app import cli_main

sys.exit(cli_main())
