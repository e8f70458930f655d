# Copyright 2026 The Velo Authors
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

"""ASR-pretraining-based hypernasality estimation."""

from ._velo import (
    Model,
    VeloError,
    aggregate_speaker,
    cer,
    frame_count,
    levenshtein,
    logmel,
    normalize,
    precision_metrics,
    read_wav,
    run_cli,
    spec_augment,
    subsampled_length,
    synth_corpus,
)

__all__ = [
    "Model",
    "VeloError",
    "aggregate_speaker",
    "cer",
    "frame_count",
    "levenshtein",
    "logmel",
    "normalize",
    "precision_metrics",
    "read_wav",
    "run_cli",
    "spec_augment",
    "subsampled_length",
    "synth_corpus",
]
