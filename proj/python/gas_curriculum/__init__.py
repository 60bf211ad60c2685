# Copyright 2026 The GAS Curriculum Authors.
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
"""Growing action spaces for off-policy RL (Python front end to the C++ core)."""

from ._core import (
    ActionHierarchy,
    ConfigError,
    ControlEnv,
    LookupError,
    UsageError,
    alpha_at,
    config_keys,
    default_config,
    evaluate,
    normalise_config,
    oracle_suite,
    read_metrics,
    sample_levels,
    train,
)

__all__ = [
    "ActionHierarchy",
    "ConfigError",
    "ControlEnv",
    "LookupError",
    "UsageError",
    "alpha_at",
    "config_keys",
    "default_config",
    "evaluate",
    "final_goal_rate",
    "normalise_config",
    "oracle_suite",
    "read_metrics",
    "sample_levels",
    "train",
]

__version__ = "0.1.0"


def final_goal_rate(metrics_path, window=20):
    """Goal rate over the last `window` training episodes of a metrics CSV."""
    rows = [r for r in read_metrics(metrics_path) if r["epsilon"] > 0]
    tail = rows[-window:]
    return sum(r["success"] for r in tail) / len(tail) if tail else 0.0
