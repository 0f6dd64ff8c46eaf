# Copyright 2026 The gaussflow Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Hermite-spectral tools for affine stochastic flows."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
from ._core import forward_compare as _forward_compare
from ._core import run_experiment as _run_experiment

__version__ = "0.1.0"


def forward_compare(*args, **kwargs):
    """Spectral, Monte Carlo and oracle routes; returns the report as a dict."""
    return _json.loads(_forward_compare(*args, **kwargs))


def run_experiment(config):
    """Runs an experiment from a dict or JSON text; returns report.json as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_experiment(text))
