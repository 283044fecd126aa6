# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from .cli import cli

if __name__ == "__main__":
    cli()
