import sys

from reebcli.cli import main


sys.exit(main())
