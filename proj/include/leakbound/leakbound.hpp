// Copyright 2026 The leakbound Authors.
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

#ifndef LEAKBOUND_LEAKBOUND_HPP_
#define LEAKBOUND_LEAKBOUND_HPP_

#include "leakbound/casegen.hpp"
#include "leakbound/core.hpp"
#include "leakbound/determinize.hpp"
#include "leakbound/greedy.hpp"
#include "leakbound/metrics.hpp"
#include "leakbound/optimize.hpp"
#include "leakbound/simplex.hpp"

#endif  // LEAKBOUND_LEAKBOUND_HPP_
