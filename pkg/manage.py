#!/usr/bin/env python
"""Entry point of the toolkit: experiments run as management commands (simulate, verify_functional, ...)."""
import os
import sys


def main():
    """Run a management command."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Activate the virtual environment and "
            "install requirements.txt first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
