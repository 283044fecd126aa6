#!/usr/bin/env python3
# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from fradelay.cli import cli

cli()
