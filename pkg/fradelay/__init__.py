# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from .helper import load_modules

load_modules()
