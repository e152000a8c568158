// Copyright 2026 The repsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "repsim/core.hpp"
#include "repsim/random.hpp"
#include "repsim/parallel.hpp"
#include "repsim/rollout.hpp"
#include "repsim/value.hpp"
#include "repsim/equivalence.hpp"
#include "repsim/instances.hpp"
#include "repsim/representativity.hpp"
#include "repsim/consensus.hpp"
#include "repsim/io.hpp"
