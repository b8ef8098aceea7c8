# Copyright 2026 The CAGR Authors.
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
"""Group recommendation with centrality-aware convolution and self-attentive aggregation."""

from ._cagr import (
    DataError,
    Model,
    NumericError,
    UsageError,
    centrality,
    generate_synthetic,
    grad_check,
    main,
    train,
)

__all__ = [
    "DataError",
    "Model",
    "NumericError",
    "UsageError",
    "centrality",
    "generate_synthetic",
    "grad_check",
    "main",
    "train",
]
__version__ = "1.0.0"
