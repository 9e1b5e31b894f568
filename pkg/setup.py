#!/usr/bin/env python

# Licensed under a 3-clause BSD style license - see LICENSE.rst

from setuptools import setup

# Metadata, dependencies and entry points live in setup.cfg
setup()
