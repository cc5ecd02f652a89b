// Copyright 2026 The pbel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "pbel/baselines/exact.hpp"
#include "pbel/baselines/model1.hpp"
#include "pbel/baselines/translate.hpp"
#include "pbel/corpus.hpp"
#include "pbel/encoder/checkpoint.hpp"
#include "pbel/encoder/model.hpp"
#include "pbel/encoder/train.hpp"
#include "pbel/eval/evaluate.hpp"
#include "pbel/eval/manifest.hpp"
#include "pbel/eval/metrics.hpp"
#include "pbel/eval/testset.hpp"
#include "pbel/linker/index.hpp"
#include "pbel/linker/index_cache.hpp"
#include "pbel/linker/kb.hpp"
#include "pbel/linker/linker.hpp"
