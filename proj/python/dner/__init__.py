# Copyright 2026 The dner Authors.
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

"""Disease mention recognition with a BiLSTM-CRF tagger."""

from ._dner import (
    CheckpointError,
    ConfigError,
    CorpusStats,
    Document,
    Error,
    EvalReport,
    Mention,
    Model,
    ModelConfig,
    NonFiniteError,
    ParseError,
    ShapeError,
    Span,
    TagError,
    TrainingError,
    convert,
    corpus_stats,
    decode_tags,
    encode_spans,
    global_score,
    log_partition,
    normalize_token,
    parse_pubtator,
    repair,
    score_entities,
    tokenize,
    train,
    viterbi_decode,
)

__all__ = [name for name in dir() if not name.startswith("_")]
